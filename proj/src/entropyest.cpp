#include "pwaff/entropyest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "pwaff/errors.hpp"
#include "pwaff/floatmap.hpp"
#include "pwaff/parallel.hpp"

namespace pwaff {

namespace {

constexpr double kGoldenFraction = 0.6180339887498949;
constexpr std::size_t kShadowStride = 100;  // exact re-run of every 100th sample
constexpr std::size_t kChunk = 4096;

const std::pair<int, std::uint64_t>* find_count(const CountSeries& s, int n) {
  for (const auto& c : s.counts)
    if (c.first == n) return &c;
  return nullptr;
}

// Re-runs a sample exactly and compares piece itineraries.
bool shadow_agrees(const PwaMap& f, const std::vector<double>& start, int steps,
                   const std::vector<std::uint16_t>& float_word, bool float_survived) {
  RVec x(start.size());
  for (std::size_t j = 0; j < start.size(); ++j) x[j] = Rat(start[j]);
  OrbitResult o = orbit(f, x, steps);
  if (o.complete != float_survived) return false;
  const std::size_t m = std::min(o.word.size(), float_word.size());
  for (std::size_t t = 0; t < m; ++t)
    if (o.word[t] != float_word[t]) return false;
  return true;
}

// Runs `steps` steps from x, writing x_0 .. x_{keep-1} to `trace` and the
// itinerary to `word` when non-null. Returns false at a singular point.
bool run_orbit(const FloatMap& fm, double* x, int steps, int keep, double* trace,
               std::vector<std::uint16_t>* word) {
  const std::size_t d = fm.dim();
  for (int t = 0; t < steps; ++t) {
    if (t < keep) std::copy(x, x + d, trace + static_cast<std::size_t>(t) * d);
    std::size_t piece = 0;
    if (!fm.step(x, &piece)) return false;
    if (word) word->push_back(static_cast<std::uint16_t>(piece));
  }
  return true;
}

void check_discards(const SampleStats& st, double max_fraction, const char* what) {
  if (st.in_domain == 0) throw Error(ErrorKind::estimation_failed, std::string(what) + ": no samples inside X");
  const double frac = static_cast<double>(st.discarded) / static_cast<double>(st.in_domain);
  if (frac > max_fraction) {
    throw Error(ErrorKind::estimation_failed,
                std::string(what) + ": " + std::to_string(st.discarded) + " of " +
                    std::to_string(st.in_domain) + " samples hit the singular set (fraction " +
                    std::to_string(frac) + ")");
  }
}

std::uint64_t mix(std::uint64_t h, std::int64_t v) {
  h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

int default_grid_per_axis(std::size_t dim) {
  switch (dim) {
    case 1: return 1 << 20;
    case 2: return 1000;
    case 3: return 100;
    default: return 20;
  }
}

double CountSeries::two_point_slope() const {
  if (counts.empty()) return 0.0;
  const int n_max = counts.back().first;
  const int n_mid = (n_max + 1) / 2;
  const auto* hi = &counts.back();
  const auto* lo = find_count(*this, n_mid);
  if (!lo || n_mid == n_max) return std::log(static_cast<double>(hi->second)) / n_max;
  return (std::log(static_cast<double>(hi->second)) - std::log(static_cast<double>(lo->second))) /
         static_cast<double>(n_max - n_mid);
}

double CountSeries::regression_slope() const {
  if (counts.empty()) return 0.0;
  const int n_max = counts.back().first;
  const int n_mid = (n_max + 1) / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, k = 0;
  for (const auto& [n, s] : counts) {
    if (n < n_mid) continue;
    const double y = std::log(static_cast<double>(s));
    sx += n;
    sy += y;
    sxx += static_cast<double>(n) * n;
    sxy += n * y;
    k += 1;
  }
  const double den = k * sxx - sx * sx;
  if (k < 2 || den == 0.0) return two_point_slope();
  return (k * sxy - sx * sy) / den;
}

CoverResult covering_counts(const PwaMap& f, int n_min, int n_max, double eps, int grid_per_axis,
                            double max_discard_fraction, double origin_shift) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("need 1 <= n_min <= n_max");
  if (grid_per_axis < 1) throw std::invalid_argument("grid_per_axis must be positive");
  const FloatMap fm(f);
  const std::size_t d = fm.dim();
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (total > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(grid_per_axis))
      throw Error(ErrorKind::resource_limit, "covering grid too large");
    total *= static_cast<std::size_t>(grid_per_axis);
  }
  if (total > (std::size_t{1} << 28)) throw Error(ErrorKind::resource_limit, "covering grid too large");
  if (origin_shift < 0.0) origin_shift = kGoldenFraction * eps;
  std::vector<double> origin(d);
  for (std::size_t j = 0; j < d; ++j) origin[j] = fm.lower()[j] - origin_shift;

  // Kronecker sequence with the generalized golden ratio phi_d (root of
  // x^(d+1) = x + 1): alpha_j = phi_d^-(j+1).
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / static_cast<double>(d + 1));
  std::vector<double> alpha(d);
  for (std::size_t j = 0; j < d; ++j) alpha[j] = std::fmod(std::pow(1.0 / phi, static_cast<double>(j + 1)), 1.0);

  const std::size_t width = static_cast<std::size_t>(n_max) * d;
  std::vector<std::int32_t> codes(total * width);
  // 0 = outside X, 1 = discarded, 2 = survived
  std::vector<std::uint8_t> status(total, 0);
  std::vector<std::uint8_t> shadowed(total, 0);

  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> x(d), start(d), trace(width);
    std::vector<std::uint16_t> word;
    for (std::size_t s = c * kChunk; s < std::min(total, (c + 1) * kChunk); ++s) {
      for (std::size_t j = 0; j < d; ++j) {
        const double u = std::fmod(0.5 + static_cast<double>(s + 1) * alpha[j], 1.0);
        start[j] = fm.lower()[j] + u * (fm.upper()[j] - fm.lower()[j]);
      }
      if (!fm.in_ambient(start.data())) continue;
      x = start;
      const bool shadow = s % kShadowStride == 0;
      word.clear();
      const bool ok = run_orbit(fm, x.data(), n_max, n_max, trace.data(), shadow ? &word : nullptr);
      status[s] = ok ? 2 : 1;
      if (ok) {
        for (std::size_t i = 0; i < width; ++i) {
          const std::size_t j = i % d;
          codes[s * width + i] = static_cast<std::int32_t>(std::floor((trace[i] - origin[j]) / eps));
        }
      }
      if (shadow) shadowed[s] = shadow_agrees(f, start, n_max, word, ok) ? 1 : 2;
    }
  });

  CoverResult out;
  out.eps = eps;
  std::vector<std::size_t> alive;
  for (std::size_t s = 0; s < total; ++s) {
    if (status[s] == 0) continue;
    ++out.stats.in_domain;
    if (status[s] == 1) ++out.stats.discarded;
    else alive.push_back(s);
    if (shadowed[s]) {
      ++out.stats.shadow_checked;
      if (shadowed[s] == 2) ++out.stats.shadow_mismatches;
    }
  }
  check_discards(out.stats, max_discard_fraction, "covering count");

  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(codes.begin() + a * width, codes.begin() + (a + 1) * width,
                                        codes.begin() + b * width, codes.begin() + (b + 1) * width);
  };
  std::sort(alive.begin(), alive.end(), less);
  // new_at[t] = adjacent pairs whose codes first differ at time t
  std::vector<std::uint64_t> new_at(static_cast<std::size_t>(n_max) + 1, 0);
  for (std::size_t k = 1; k < alive.size(); ++k) {
    const auto* a = &codes[alive[k - 1] * width];
    const auto* b = &codes[alive[k] * width];
    std::size_t i = 0;
    while (i < width && a[i] == b[i]) ++i;
    new_at[i / d] += 1;
  }
  std::uint64_t running = alive.empty() ? 0 : 1;
  for (int n = 1; n <= n_max; ++n) {
    running += new_at[static_cast<std::size_t>(n - 1)];
    if (n >= n_min) out.series.counts.emplace_back(n, running);
  }
  return out;
}

std::uint64_t covering_count(const PwaMap& f, int n, double eps, int grid_per_axis) {
  return covering_counts(f, n, n, eps, grid_per_axis, 1.0).series.counts.back().second;
}

SeparatedResult separated_counts(const PwaMap& f, const std::vector<int>& ns, double eps,
                                 int samples, std::uint64_t seed, double max_discard_fraction,
                                 const std::vector<std::vector<double>>& extra_starts) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (ns.empty()) throw std::invalid_argument("no n values given");
  if (samples < 1) throw std::invalid_argument("samples must be positive");
  for (int n : ns)
    if (n < 1) throw std::invalid_argument("n must be positive");
  std::vector<int> order = ns;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  const int n_top = order.back();

  const FloatMap fm(f);
  const std::size_t d = fm.dim();
  const std::size_t width = static_cast<std::size_t>(n_top) * d;
  const std::size_t extra = extra_starts.size();
  for (const auto& e : extra_starts)
    if (e.size() != d) throw Error(ErrorKind::dimension_mismatch, "start point has the wrong dimension");
  const auto count = extra + static_cast<std::size_t>(samples);
  std::vector<double> traces(count * width);
  std::vector<std::uint8_t> status(count, 0), shadowed(count, 0);

  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> x(d), start(d);
    std::vector<std::uint16_t> word;
    for (std::size_t s = c * kChunk; s < std::min(count, (c + 1) * kChunk); ++s) {
      if (s < extra) {
        start = extra_starts[s];
      } else {
        std::seed_seq sseq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(s - extra)};
        std::mt19937_64 rng(sseq);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        bool found = false;
        for (int attempt = 0; attempt < 64 && !found; ++attempt) {
          for (std::size_t j = 0; j < d; ++j)
            start[j] = fm.lower()[j] + (fm.upper()[j] - fm.lower()[j]) * unit(rng);
          found = fm.in_ambient(start.data());
        }
        if (!found) continue;
      }
      x = start;
      const bool shadow = s % kShadowStride == 0;
      word.clear();
      const bool ok = run_orbit(fm, x.data(), n_top, n_top, &traces[s * width], shadow ? &word : nullptr);
      status[s] = ok ? 2 : 1;
      if (shadow) shadowed[s] = shadow_agrees(f, start, n_top, word, ok) ? 1 : 2;
    }
  });

  SeparatedResult out;
  out.eps = eps;
  std::vector<std::size_t> alive;
  for (std::size_t s = 0; s < count; ++s) {
    if (status[s] == 0) continue;
    ++out.stats.in_domain;
    if (status[s] == 1) ++out.stats.discarded;
    else alive.push_back(s);
    if (shadowed[s]) {
      ++out.stats.shadow_checked;
      if (shadowed[s] == 2) ++out.stats.shadow_mismatches;
    }
  }
  check_discards(out.stats, max_discard_fraction, "separated count");

  // Greedy in sample order. Two orbits within eps at every time sit in
  // adjacent eps-boxes at times 0 and n-1, so candidates come from the
  // 3^(2d) neighbouring buckets of that key.
  for (int n : order) {
    const std::vector<std::size_t> times =
        n == 1 ? std::vector<std::size_t>{0} : std::vector<std::size_t>{0, static_cast<std::size_t>(n - 1)};
    const std::size_t key_len = times.size() * d;
    auto box = [&](std::size_t s, std::size_t i) {
      const std::size_t t = times[i / d], j = i % d;
      return static_cast<std::int64_t>(std::floor((traces[s * width + t * d + j] - fm.lower()[j]) / eps));
    };
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    std::uint64_t accepted = 0;
    std::vector<std::int64_t> key(key_len);
    std::vector<int> offset(key_len);
    for (std::size_t s : alive) {
      for (std::size_t i = 0; i < key_len; ++i) key[i] = box(s, i);
      bool close = false;
      std::fill(offset.begin(), offset.end(), -1);
      for (bool more = true; more && !close;) {
        std::uint64_t h = 0;
        for (std::size_t i = 0; i < key_len; ++i) h = mix(h, key[i] + offset[i]);
        auto it = buckets.find(h);
        if (it != buckets.end()) {
          for (std::size_t other : it->second) {
            bool all_near = true;
            for (std::size_t i = 0; i < static_cast<std::size_t>(n) * d && all_near; ++i)
              all_near = std::abs(traces[s * width + i] - traces[other * width + i]) < eps;
            if (all_near) {
              close = true;
              break;
            }
          }
        }
        more = false;
        for (std::size_t i = 0; i < key_len; ++i) {
          if (offset[i] < 1) {
            ++offset[i];
            more = true;
            break;
          }
          offset[i] = -1;
        }
      }
      if (close) continue;
      std::uint64_t h = 0;
      for (std::size_t i = 0; i < key_len; ++i) h = mix(h, key[i]);
      buckets[h].push_back(s);
      ++accepted;
    }
    out.series.counts.emplace_back(n, accepted);
  }
  return out;
}

std::uint64_t separated_lower_count(const PwaMap& f, int n, double eps, int samples,
                                    std::uint64_t seed) {
  return separated_counts(f, {n}, eps, samples, seed, 1.0).series.counts.back().second;
}

void check_config(const EstimateConfig& c) {
  if (c.eps_ladder.empty()) throw std::invalid_argument("empty eps ladder");
  for (double e : c.eps_ladder)
    if (!(e > 0.0)) throw std::invalid_argument("eps values must be positive");
  for (double e : c.sep_eps)
    if (!(e > 0.0)) throw std::invalid_argument("eps values must be positive");
  if (c.n_min < 1 || c.n_max < c.n_min) throw std::invalid_argument("need 1 <= n_min <= n_max");
  if (c.grid_per_axis < 0) throw std::invalid_argument("grid must be positive");
  if (c.samples < 1) throw std::invalid_argument("samples must be positive");
  if (c.sep_n < 1) throw std::invalid_argument("separated n must be positive");
  if (c.bound_n < 0) throw std::invalid_argument("bound n must be non-negative");
}

EntropyReport estimate(const PwaMap& f, const EstimateConfig& config) {
  check_config(config);
  EntropyReport r;
  const int grid = config.grid_per_axis > 0 ? config.grid_per_axis : default_grid_per_axis(f.dim());
  const double eps_min = *std::min_element(config.eps_ladder.begin(), config.eps_ladder.end());
  std::vector<double> ladder = config.eps_ladder;
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  for (double eps : ladder) {
    r.ladder.push_back(covering_counts(f, config.n_min, config.n_max, eps, grid,
                                       config.max_discard_fraction, kGoldenFraction * eps_min));
  }
  r.headline = r.ladder.back().series.two_point_slope();

  std::optional<GrowthReport> growth;
  if (config.bound_n > 0) growth = growth_sequences(f, config.bound_n, config.cell_cap);

  std::vector<std::vector<double>> starts;
  if (config.seed_cells) {
    const Partition z = growth && growth->last.n == config.sep_n
                            ? growth->last
                            : iterate_partition(f, config.sep_n, config.cell_cap);
    for (const auto& cell : z.cells) {
      const RVec p = interior_point(cell.region);
      std::vector<double> x(p.dim());
      for (std::size_t j = 0; j < p.dim(); ++j) x[j] = p[j].get_d();
      starts.push_back(std::move(x));
    }
    r.seeded_cells = starts.size();
  }
  const std::vector<int> sep_ns{(config.sep_n + 1) / 2, config.sep_n};
  r.lower_bound = 0.0;
  for (double eps : config.sep_eps) {
    SeparatedResult sep = separated_counts(f, sep_ns, eps, config.samples, config.seed,
                                           config.max_discard_fraction);
    if (!starts.empty()) {
      // Greedy order matters; both runs give separated sets, keep the larger per n.
      SeparatedResult seeded = separated_counts(f, sep_ns, eps, config.samples, config.seed,
                                                config.max_discard_fraction, starts);
      for (std::size_t k = 0; k < sep.series.counts.size(); ++k)
        sep.series.counts[k].second = std::max(sep.series.counts[k].second, seeded.series.counts[k].second);
      sep.stats = seeded.stats;
    }
    r.separated.push_back(std::move(sep));
    r.lower_bound = std::max(r.lower_bound, r.separated.back().series.two_point_slope());
  }

  r.upper_bound = std::numeric_limits<double>::infinity();
  if (growth) {
    r.rates_bound = entropy_upper_bound(f, *growth);
    r.upper_bound = r.rates_bound->total;
  }
  r.verdict_lo = r.lower_bound;
  r.verdict_hi = r.upper_bound;
  return r;
}

}  // namespace pwaff
