#include "dssalloc/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dssalloc/analysis.hpp"
#include "dssalloc/detail/overloaded.hpp"
#include "dssalloc/error.hpp"

namespace dssalloc {

using detail::overloaded;

namespace {

constexpr long long kBlock = 65536;
constexpr std::uint64_t kTopupTag = 0x746f707570ULL;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Moments {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const long long total = n + o.n;
    const double d = o.mean - mean;
    mean += d * double(o.n) / double(total);
    m2 += o.m2 + d * d * double(n) * double(o.n) / double(total);
    n = total;
  }

  double variance_of_mean() const { return n > 1 ? m2 / double(n - 1) / double(n) : 0.0; }
};

struct Block {
  std::vector<long long> counts;
  std::vector<Moments> times;
};

void check_sim(const SimConfig& sim) {
  if (sim.trials < 1) throw ConfigError(fmt::format("trials must be positive, got {}", sim.trials));
  if (sim.workers < 1) throw ConfigError(fmt::format("workers must be positive, got {}", sim.workers));
  if (sim.min_count < 0) {
    throw ConfigError(fmt::format("min_count must be >= 0, got {}", sim.min_count));
  }
}

// Runs fill(block_index, first_trial, last_trial, block) over fixed blocks and
// merges the results in block order.
template <class Fill>
Block run_blocks(const SimConfig& sim, int strata, Fill fill) {
  const long long nblocks = (sim.trials + kBlock - 1) / kBlock;
  std::vector<Block> blocks(nblocks);
  std::atomic<long long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (long long b = next++; b < nblocks; b = next++) {
        Block& blk = blocks[b];
        blk.counts.assign(strata, 0);
        blk.times.assign(strata, Moments{});
        fill(b * kBlock, std::min(sim.trials, (b + 1) * kBlock), blk);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = nblocks;
    }
  };
  const int n = static_cast<int>(std::clamp<long long>(sim.workers, 1, nblocks));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  Block total;
  total.counts.assign(strata, 0);
  total.times.assign(strata, Moments{});
  for (const auto& blk : blocks) {
    for (int i = 0; i < strata; ++i) {
      total.counts[i] += blk.counts[i];
      total.times[i].merge(blk.times[i]);
    }
  }
  return total;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t index) : key_(splitmix(splitmix(seed) ^ index)) {}

std::uint64_t Rng::next() { return splitmix(key_ + 0x632be59bd9b4e019ULL * ++counter_); }

double Rng::uniform() { return double(next() >> 11) * 0x1.0p-53; }

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

int sample_phi(const AccessModel& access, const SystemConfig& config, Rng& rng) {
  const int data = config.data_nodes();
  return std::visit(overloaded{
                        [&](const FixedSize& a) {
                          // selection sampling over node labels; labels < data hold blocks
                          int needed = a.accessed;
                          int phi = 0;
                          for (int i = 0; i < config.nodes && needed > 0; ++i) {
                            if (rng.uniform() * (config.nodes - i) < needed) {
                              --needed;
                              if (i < data) ++phi;
                            }
                          }
                          return phi;
                        },
                        [&](const Probabilistic& a) {
                          int phi = 0;
                          for (int i = 0; i < data; ++i) phi += rng.uniform() >= a.failure;
                          return phi;
                        },
                    },
                    access);
}

double sample_completion_time(const ServiceModel& service, int alpha, int phi, Rng& rng) {
  if (alpha < 1 || phi < alpha) {
    throw ConfigError(fmt::format("completion time needs phi >= alpha >= 1, got phi={} alpha={}",
                                  phi, alpha));
  }
  if (const auto* c = std::get_if<ConstantTime>(&service)) return c->delta / alpha;
  thread_local std::vector<double> draws;
  draws.resize(phi);
  std::visit(overloaded{
                 [&](const SmallExp& s) {
                   for (auto& d : draws) d = rng.exponential(s.mu);
                 },
                 [&](const ScaledExp& s) {
                   for (auto& d : draws) d = rng.exponential(alpha * s.mu);
                 },
                 [&](const ShiftedExp& s) {
                   for (auto& d : draws) d = s.delta / alpha + rng.exponential(s.mu);
                 },
                 [](const ConstantTime&) {},
             },
             service);
  std::nth_element(draws.begin(), draws.begin() + (alpha - 1), draws.end());
  return draws[alpha - 1];
}

SimEstimate estimate_service_rate(const SystemConfig& config, const AccessModel& access,
                                  const ServiceModel& service, const SimConfig& sim) {
  check_sim(sim);
  validate(service);
  const auto pmf = access_pmf(config, access);
  const int strata = static_cast<int>(pmf.size());
  const int alpha = config.alpha;

  Block total = run_blocks(sim, strata, [&](long long first, long long last, Block& blk) {
    for (long long t = first; t < last; ++t) {
      Rng rng(sim.seed, static_cast<std::uint64_t>(t));
      const int phi = sample_phi(access, config, rng);
      ++blk.counts[phi];
      if (phi >= alpha) blk.times[phi].add(sample_completion_time(service, alpha, phi, rng));
    }
  });

  SimEstimate est;
  est.trials = sim.trials;
  double variance = 0.0;
  for (int phi = 0; phi < strata; ++phi) {
    if (total.counts[phi] > 0) est.per_phi_counts[phi] = total.counts[phi];
    if (phi < alpha || pmf[phi] <= 0.0) continue;
    Moments& m = total.times[phi];
    if (m.n < sim.min_count) {
      const long long extra = sim.min_count - m.n;
      const std::uint64_t stream = splitmix(sim.seed ^ kTopupTag) + static_cast<std::uint64_t>(phi);
      for (long long j = 0; j < extra; ++j) {
        Rng rng(stream, static_cast<std::uint64_t>(j));
        m.add(sample_completion_time(service, alpha, phi, rng));
      }
      est.topups[phi] = extra;
    }
    if (m.n == 0) {
      throw InsufficientTrialsError(fmt::format(
          "no samples for phi={} (P={:.3g}) after {} trials; raise trials or min_count", phi,
          pmf[phi], sim.trials));
    }
    const double v = m.variance_of_mean();
    est.per_phi_mean_time[phi] = m.mean;
    est.mean += pmf[phi] * (1.0 / m.mean - v / (m.mean * m.mean * m.mean));
    variance += pmf[phi] * pmf[phi] * v / std::pow(m.mean, 4);
  }
  est.std_error = std::sqrt(variance);
  return est;
}

SimEstimate estimate_recovery_probability(const SystemConfig& config, const AccessModel& access,
                                          const SimConfig& sim) {
  check_sim(sim);
  config.validate();
  validate(access, config.nodes);
  const int strata = config.data_nodes() + 1;
  Block total = run_blocks(sim, strata, [&](long long first, long long last, Block& blk) {
    for (long long t = first; t < last; ++t) {
      Rng rng(sim.seed, static_cast<std::uint64_t>(t));
      ++blk.counts[sample_phi(access, config, rng)];
    }
  });
  SimEstimate est;
  est.trials = sim.trials;
  long long hits = 0;
  for (int phi = 0; phi < strata; ++phi) {
    if (total.counts[phi] > 0) est.per_phi_counts[phi] = total.counts[phi];
    if (phi >= config.alpha) hits += total.counts[phi];
  }
  est.mean = double(hits) / double(sim.trials);
  est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / double(sim.trials));
  return est;
}

double phi_total_variation(const SimEstimate& estimate, const SystemConfig& config,
                           const AccessModel& access) {
  const auto pmf = access_pmf(config, access);
  double tv = 0.0;
  for (int phi = 0; phi < static_cast<int>(pmf.size()); ++phi) {
    const auto it = estimate.per_phi_counts.find(phi);
    const double freq =
        it == estimate.per_phi_counts.end() ? 0.0 : double(it->second) / double(estimate.trials);
    tv += std::abs(freq - pmf[phi]);
  }
  return tv / 2.0;
}

int default_workers() {
  if (const char* env = std::getenv("DSS_ALLOC_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("DSS_ALLOC_THREADS must be a positive integer, got '{}'", env));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace dssalloc
