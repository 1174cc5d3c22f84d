#include "relucirc/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <random>

#include "relucirc/error.hpp"

namespace relucirc {

namespace {

struct Band {
  double y;
  std::uint8_t label;
};

constexpr std::array<Band, 4> kBands = {{{-1.0, 0}, {1.0, 1}, {-2.2, 1}, {2.2, 0}}};

std::size_t band_count(Tier tier) { return static_cast<std::size_t>(tier) + 1; }

double nominal_mean_y(Tier tier) {
  double sum = 0.0;
  for (std::size_t b = 0; b < band_count(tier); ++b) sum += kBands[b].y;
  return sum / static_cast<double>(band_count(tier));
}

}  // namespace

std::string tier_name(Tier tier) {
  switch (tier) {
    case Tier::kDataI: return "DataI";
    case Tier::kDataII: return "DataII";
    case Tier::kDataIII: return "DataIII";
  }
  return "?";
}

Tier parse_tier(const std::string& text) {
  std::string t;
  for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t.rfind("data", 0) == 0) t = t.substr(4);
  if (t == "i" || t == "1") return Tier::kDataI;
  if (t == "ii" || t == "2") return Tier::kDataII;
  if (t == "iii" || t == "3") return Tier::kDataIII;
  throw InputError("unknown data tier '" + text + "'");
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.samples_per_class == 0) throw InputError("samples_per_class must be positive");
  if (!(spec.noise_std >= 0.0)) throw InputError("noise_std must be nonnegative");
  const std::size_t bands = band_count(spec.tier);
  const std::size_t n = spec.samples_per_class;
  const double shift = -nominal_mean_y(spec.tier);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&] {
    double z = gauss(rng);
    while (std::abs(z) > 3.0) z = gauss(rng);
    return z * spec.noise_std;
  };

  Dataset data;
  data.name = tier_name(spec.tier);
  data.points.resize(2, static_cast<Eigen::Index>(bands * n));
  data.labels.reserve(bands * n);
  Eigen::Index col = 0;
  for (std::size_t b = 0; b < bands; ++b) {
    for (std::size_t i = 0; i < n; ++i, ++col) {
      const double dx = draw();
      const double dy = draw();
      data.points(0, col) = dx;
      data.points(1, col) = kBands[b].y + dy + shift;
      data.labels.push_back(kBands[b].label);
    }
  }
  return data;
}

Vector nesting_offset(Tier from, Tier to) {
  Vector v(2);
  v << 0.0, nominal_mean_y(from) - nominal_mean_y(to);
  return v;
}

}  // namespace relucirc
