#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "scriptdrift/error.hpp"
#include "scriptdrift/evm.hpp"
#include "scriptdrift/util.hpp"

using namespace scriptdrift;

namespace {

// Exhaustive scan over a fine grid plus every score and its successor.
double best_gap_oracle(const std::vector<double>& known, const std::vector<double>& novel) {
  std::vector<double> ts;
  for (int i = 0; i <= 10000; ++i) ts.push_back(i / 10000.0);
  for (const auto* set : {&known, &novel}) {
    for (double v : *set) ts.insert(ts.end(), {v, std::nextafter(v, 2.0)});
  }
  double best = 1e9;
  for (double t : ts) {
    double fp = 0, fn = 0;
    for (double v : known) fp += v < t;
    for (double v : novel) fn += v >= t;
    best = std::min(best, std::abs(fp / known.size() - fn / novel.size()));
  }
  return best;
}

ClassPoints two_blobs(std::uint64_t seed, int n = 200) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  ClassPoints pts;
  for (int i = 0; i < n; ++i) {
    pts["A"].push_back({g(rng), g(rng)});
    pts["B"].push_back({5 + g(rng), g(rng)});
  }
  return pts;
}

EvmHyperparams euclidean() {
  EvmHyperparams hp;
  hp.distance = DistanceKind::Euclidean;
  return hp;
}

}  // namespace

TEST_CASE("weibull fit recovers a rayleigh") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(1000);
  for (auto& v : x) v = std::sqrt(-std::log(1.0 - u(rng)));
  const auto fit = fit_weibull(x);
  CHECK(fit.shape == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit.scale == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_AS(fit_weibull(std::vector<double>(10, 0.0)), Error);
  CHECK(weibull_psi(0.0, fit.shape, fit.scale) == 1.0);
  CHECK(weibull_psi(1e9, fit.shape, fit.scale) == doctest::Approx(0.0));
}

TEST_CASE("two blobs") {
  const auto pts = two_blobs(3);
  const auto model = fit_evm(pts, euclidean(), "blobs", 2);
  const auto labels = model.labels();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    for (const auto& x : pts.at(labels[c])) {
      const auto s = model.class_scores(x);
      const double own = s[c] / (s[0] + s[1]);
      CHECK(own >= 0.99);
    }
  }
  const auto anchor = model.classes[0].extreme_vectors[0].anchor;
  const std::vector<double> at(anchor.begin(), anchor.end());
  CHECK(model.class_scores(at)[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(model.predict(at), Error);
}

TEST_CASE("duplicates collapse under full cover") {
  ClassPoints pts;
  for (int i = 0; i < 5; ++i) pts["A"].push_back({1, 1});
  for (int i = 0; i < 5; ++i) pts["B"].push_back({4, 4.5 + i});
  auto hp = euclidean();
  hp.cover_threshold = 1.0;
  const auto model = fit_evm(pts, hp, "dup", 1);
  CHECK(model.classes[0].extreme_vectors.size() == 1);
}

TEST_CASE("k+1 composition") {
  const std::vector<double> s{0.8, 0.4};
  const auto p = compose_probabilities(s);
  CHECK(p[0] == doctest::Approx(0.8 * 2 / 3));
  CHECK(p[1] == doctest::Approx(0.8 / 3));
  CHECK(p[2] == doctest::Approx(0.2));
  CHECK(compose_probabilities(std::vector<double>{1.0, 0.5}).back() == 0.0);
  CHECK(compose_probabilities(std::vector<double>{0.0, 0.0}) == std::vector<double>{0, 0, 1});
}

TEST_CASE("threshold calibration") {
  const std::vector<double> known{0.95, 0.9, 0.99}, novel{0.1, 0.05, 0.0};
  const auto c = calibrate_threshold(known, novel);
  CHECK(c.eer == 0);
  CHECK(c.threshold == std::nextafter(0.1, 1.0));

  const std::vector<double> k2{0.9, 0.8, 0.3}, n2{0.7, 0.2, 0.1};
  const auto c2 = calibrate_threshold(k2, n2);
  CHECK(std::abs(c2.fpr - c2.fnr) == doctest::Approx(best_gap_oracle(k2, n2)));

  const std::vector<double> same{0.2, 0.4, 0.6, 0.8};
  CHECK(calibrate_threshold(same, same).eer == doctest::Approx(0.5));
}

TEST_CASE("model files") {
  const auto dir = scratch("evm");
  auto model = fit_evm(two_blobs(5, 60), euclidean(), "mean-hog", 1);
  model.novelty_threshold = 0.3;
  model.save(dir / "m.evm");
  const auto bytes = read_file_bytes(dir / "m.evm", "test");
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "EVM1");
  const auto back = EvmModel::load(dir / "m.evm");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 6);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{u(rng), u(rng)};
    CHECK(back.predict(x) == model.predict(x));
  }
  auto cut = bytes;
  cut.resize(cut.size() - 5);
  write_file_bytes(dir / "cut.evm", cut, "test");
  CHECK_THROWS_AS(EvmModel::load(dir / "cut.evm"), Error);
  CHECK_THROWS_AS(back.check_extractor("m-mean-hog"), Error);
}
