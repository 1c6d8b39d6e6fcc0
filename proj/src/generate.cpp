#include "sbcheck/generate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sbcheck {

namespace {

// std:: distributions differ between standard libraries; these do not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Gap to the next success of a Bernoulli(p) sequence.
  std::uint64_t skip(double p) {
    if (p >= 1.0) return 0;
    const double u = 1.0 - unit();  // (0, 1]
    return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
  }

 private:
  std::mt19937_64 engine_;
};

constexpr int kKeys = 12;  // 3*x + y over x in 0..3, y in 0..2

const char* const kInvariants[] = {"true", "z", "!z", "y <= 1", "x != 0", "y >= 1"};

}  // namespace

SBSystem gen_random(const GenParams& p) {
  if (p.b_states == 0 || p.s_states == 0) throw ContractError("gen_random: need at least one B and one S state");
  if (!(p.density > 0.0 && p.density <= 1.0)) throw ContractError("gen_random: density must lie in (0, 1]");
  if (!(p.s_density >= 0.0 && p.s_density <= 1.0)) throw ContractError("gen_random: s_density must lie in [0, 1]");
  if (p.s_states > kKeys) {
    throw ContractError("gen_random: at most " + std::to_string(kKeys) + " S states fit the label partition");
  }
  Rng rng(p.seed);

  SBSystem sys;
  sys.name = "gen_" + std::to_string(p.seed);
  sys.sig.add("x", Sort::integer(0, 3));
  sys.sig.add("y", Sort::integer(0, 2));
  sys.sig.add("z", Sort::boolean());

  // Interval boundaries: s_states - 1 distinct cut points in 1..11.
  std::vector<int> cuts;
  {
    std::vector<int> pool;
    for (int k = 1; k < kKeys; ++k) pool.push_back(k);
    for (std::size_t i = 0; i + 1 < p.s_states; ++i) {
      auto j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      cuts.push_back(pool[i]);
    }
    std::sort(cuts.begin(), cuts.end());
  }
  std::vector<std::pair<int, int>> ranges;
  {
    int lo = 0;
    for (int c : cuts) {
      ranges.emplace_back(lo, c - 1);
      lo = c;
    }
    ranges.emplace_back(lo, kKeys - 1);
  }
  for (std::size_t r = 0; r < p.s_states; ++r) {
    auto [lo, hi] = ranges[r];
    std::string text = lo == hi ? "3 * x + y == " + std::to_string(lo)
                                : "3 * x + y >= " + std::to_string(lo) + " && 3 * x + y <= " + std::to_string(hi);
    sys.s.states.push_back({"r" + std::to_string(r), parse_formula(text, sys.sig)});
  }
  sys.s.initial = 0;
  for (std::size_t a = 0; a < p.s_states; ++a) {
    for (std::size_t b = 0; b < p.s_states; ++b) {
      if (rng.unit() >= p.s_density) continue;
      const auto first = rng.below(std::size(kInvariants));
      sys.s.transitions.push_back(
          {StateIndex(a), parse_formula(kInvariants[first], sys.sig), StateIndex(b)});
      // Occasionally a second, different invariant on the same pair.
      if (rng.unit() < 0.15) {
        const auto second = (first + 1 + rng.below(std::size(kInvariants) - 1)) % std::size(kInvariants);
        sys.s.transitions.push_back(
            {StateIndex(a), parse_formula(kInvariants[second], sys.sig), StateIndex(b)});
      }
    }
  }

  auto observation = [&](int key) {
    return Observation{{key / 3, key % 3, static_cast<Value>(rng.below(2))}};
  };
  for (std::size_t q = 0; q < p.b_states; ++q) {
    int key = static_cast<int>(rng.below(kKeys));
    if (q == 0) key = ranges[0].first + static_cast<int>(rng.below(ranges[0].second - ranges[0].first + 1));
    sys.b.states.push_back({"q" + std::to_string(q), observation(key)});
  }
  sys.b.initial = 0;

  const std::uint64_t n = p.b_states;
  const std::uint64_t cells = n * n;
  for (std::uint64_t cell = rng.skip(p.density); cell < cells; cell += 1 + rng.skip(p.density)) {
    sys.b.transitions.emplace_back(StateIndex(cell / n), StateIndex(cell % n));
  }
  return sys;
}

}  // namespace sbcheck
