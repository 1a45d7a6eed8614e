#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../support/oracles.hpp"
#include "saekit/disentangle.hpp"
#include "saekit/error.hpp"
#include "saekit/lasso.hpp"
#include "saekit/metrics.hpp"

using namespace saekit;

namespace {

Design design_from_columns(const std::vector<std::vector<double>>& cols) {
  Design z(cols.front().size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) std::copy(cols[j].begin(), cols[j].end(), z.col(j).begin());
  return z;
}

// Standardised Gaussian design plus a sparse linear target with noise.
struct Problem {
  Design z;
  std::vector<double> f;
};

Problem random_problem(std::mt19937_64& gen, std::size_t m, std::size_t p) {
  std::normal_distribution<double> nd;
  Problem pr{Design(m, p), std::vector<double>(m)};
  for (std::size_t j = 0; j < p; ++j) {
    auto col = pr.z.col(j);
    for (auto& v : col) v = nd(gen);
    double mean = 0, sq = 0;
    for (double v : col) mean += v;
    mean /= m;
    for (auto& v : col) {
      v -= mean;
      sq += v * v;
    }
    const double sd = std::sqrt(sq / m);
    for (auto& v : col) v /= sd;
  }
  std::vector<double> beta(p, 0.0);
  for (std::size_t j = 0; j < p; j += 5) beta[j] = nd(gen);
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 3.0 + 0.3 * nd(gen);
    for (std::size_t j = 0; j < p; ++j) acc += pr.z(r, j) * beta[j];
    pr.f[r] = acc;
  }
  return pr;
}

double closed_form(double c, double lam) {
  return c > lam ? c - lam : c < -lam ? c + lam : 0.0;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected saekit::Error");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("lasso: orthonormal design has a closed form") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  const std::size_t m = 200, p = 12;
  const Design z = design_from_columns(oracle::centered_orthonormal_columns(gen, m, p));
  std::vector<double> f(m);
  for (auto& v : f) v = 2.0 + nd(gen);
  for (double lam : {0.0, 0.01, 0.05, 0.2}) {
    const LassoModel model = fit_lasso(z, f, lam, {.max_iter = 1000, .tol = 1e-12});
    CHECK(model.converged);
    for (std::size_t j = 0; j < p; ++j) {
      double c = 0;
      for (std::size_t r = 0; r < m; ++r) c += z(r, j) * f[r];
      CHECK(std::fabs(model.beta[j] - closed_form(c / m, lam)) <= 1e-8);
    }
  }
  const double lmax = lasso_lambda_max(z, f);
  const LassoModel zero = fit_lasso(z, f, lmax);
  CHECK(zero.nnz() == 0);
  double mean = 0;
  for (double v : f) mean += v;
  CHECK(zero.intercept == doctest::Approx(mean / m));
}

TEST_CASE("lasso: lam = 0 reproduces least squares") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Problem pr = random_problem(gen, 200, 8);
    std::vector<std::vector<double>> rows(200, std::vector<double>(8));
    for (std::size_t r = 0; r < 200; ++r)
      for (std::size_t j = 0; j < 8; ++j) rows[r][j] = pr.z(r, j);
    const auto ref = oracle::ols(rows, pr.f);
    const LassoModel model = fit_lasso(pr.z, pr.f, 0.0, {.max_iter = 10000, .tol = 1e-12});
    for (std::size_t j = 0; j < 8; ++j) CHECK(std::fabs(model.beta[j] - ref[j]) <= 1e-5);
    CHECK(std::fabs(model.intercept - ref[8]) <= 1e-5);
    const auto pred = lasso_predict(model, pr.z);
    for (std::size_t r = 0; r < 200; ++r) {
      double want = ref[8];
      for (std::size_t j = 0; j < 8; ++j) want += ref[j] * pr.z(r, j);
      CHECK(std::fabs(pred[r] - want) <= 1e-5);
    }
  }
}

TEST_CASE("lasso: KKT conditions and monotone sparsity") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Problem pr = random_problem(gen, 200, 50);
    const double lmax = lasso_lambda_max(pr.z, pr.f);
    std::size_t prev_nnz = 51;
    for (double frac : {0.001, 0.01, 0.05, 0.2, 0.5, 1.0}) {
      const LassoOptions opts;
      const double lam = frac * lmax;
      const LassoModel model = fit_lasso(pr.z, pr.f, lam, opts);
      REQUIRE(model.converged);
      std::vector<double> resid(200);
      for (std::size_t r = 0; r < 200; ++r) {
        double fit = model.intercept;
        for (std::size_t j = 0; j < 50; ++j) fit += pr.z(r, j) * model.beta[j];
        resid[r] = pr.f[r] - fit;
      }
      for (std::size_t j = 0; j < 50; ++j) {
        double g = 0;
        for (std::size_t r = 0; r < 200; ++r) g += pr.z(r, j) * resid[r];
        g /= 200;
        if (model.beta[j] == 0.0)
          CHECK(std::fabs(g) <= lam + opts.tol * 10);
        else
          CHECK(std::fabs(g - lam * (model.beta[j] > 0 ? 1 : -1)) <= opts.tol * 10);
      }
      CHECK(model.nnz() <= prev_nnz);
      prev_nnz = model.nnz();
    }
    CHECK(prev_nnz == 0);
  }
}

TEST_CASE("lasso: degenerate columns and errors") {
  Design z(4, 2);
  const double col0[] = {1, -1, 1, -1};
  std::copy(std::begin(col0), std::end(col0), z.col(0).begin());
  const std::vector<double> f{2, 0, 2, 0};
  const LassoModel model = fit_lasso(z, f, 0.0);
  CHECK(model.skipped_columns == 1);
  CHECK(model.beta[1] == 0.0);
  CHECK(model.beta[0] == doctest::Approx(1.0));
  CHECK(code_of([&] { fit_lasso(z, f, -1.0); }) == ErrorCode::DomainError);
  CHECK(code_of([&] { fit_lasso(z, std::vector<double>{1, 2}, 0.1); }) == ErrorCode::ShapeError);

  std::mt19937_64 gen(4);
  const Problem pr = random_problem(gen, 50, 10);
  const LassoModel capped = fit_lasso(pr.z, pr.f, 0.0, {.max_iter = 1, .tol = 1e-14});
  CHECK_FALSE(capped.converged);
  CHECK(capped.iterations == 1);
}

TEST_CASE("r2_score") {
  const std::vector<double> y{1, 2, 3};
  CHECK(r2_score(y, y) == 1.0);
  CHECK(r2_score(y, std::vector<double>{2, 2, 2}) == 0.0);
  CHECK(r2_score(y, std::vector<double>{1, 2, 4}) == 0.5);
  CHECK(r2_score(y, std::vector<double>{3, 2, 1}) < 0.0);
  CHECK(code_of([] { r2_score(std::vector<double>{4, 4}, std::vector<double>{1, 2}); }) ==
        ErrorCode::DegenerateTarget);
}

TEST_CASE("completeness") {
  CHECK(completeness(std::vector<double>{0, 0, 3, 0}) == 1.0);
  CHECK(completeness(std::vector<double>(7, 0.2)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(completeness(std::vector<double>{1, 1, 0, 0}) == doctest::Approx(0.5));
  CHECK(completeness(std::vector<double>{0, 0, 0}) == 0.0);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ud(0, 1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> r(20), scaled(20);
    for (std::size_t j = 0; j < 20; ++j) scaled[j] = 37.5 * (r[j] = ud(gen) * (ud(gen) < 0.5));
    const double c = completeness(r);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    CHECK(completeness(scaled) == doctest::Approx(c).epsilon(1e-12));
  }
  CHECK(code_of([] { completeness(std::vector<double>{1, -1}); }) == ErrorCode::DomainError);
  CHECK(code_of([] { completeness(std::vector<double>{1}); }) == ErrorCode::DomainError);
}

TEST_CASE("knn_entropy") {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> ud(0, 1);
  std::normal_distribution<double> nd;
  std::vector<double> u(10000), g(10000);
  for (auto& v : u) v = ud(gen);
  for (auto& v : g) v = nd(gen);
  const double hu = knn_entropy(u, 3), hg = knn_entropy(g, 3);
  CHECK(std::fabs(hu) <= 0.05);
  CHECK(std::fabs(hg - 0.5 * std::log(2 * std::numbers::pi * std::numbers::e)) <= 0.05);

  std::vector<double> twice(g);
  for (auto& v : twice) v *= 2;
  CHECK(std::fabs(knn_entropy(twice, 3) - hg - std::log(2.0)) <= 0.02);

  // Dyadic samples shifted by an integer keep every distance exact.
  std::vector<double> dy(500), shifted(500);
  for (std::size_t i = 0; i < 500; ++i) {
    dy[i] = static_cast<double>(gen() % 100000) / 1024.0;
    shifted[i] = dy[i] + 17.0;
  }
  CHECK(knn_entropy(shifted, 3) == knn_entropy(dy, 3));

  std::vector<double> dup{1, 1, 1, 2, 2, 3, 3, 3, 3, 4};
  const double hd = knn_entropy(dup, 3, 9);
  CHECK(std::isfinite(hd));
  CHECK(knn_entropy(dup, 3, 9) == hd);

  CHECK(code_of([] { knn_entropy(std::vector<double>{1, 2, 3}, 3); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("spearman") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  CHECK(spearman(a, std::vector<double>{2, 4, 6, 8, 100}) == doctest::Approx(1.0));
  CHECK(spearman(a, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  // ties get average ranks: ranks of b are 1.5, 1.5, 3, 4, 5
  const double r = spearman(a, std::vector<double>{1, 1, 2, 3, 4});
  CHECK(r == doctest::Approx(0.9746794344808963).epsilon(1e-12));
}

TEST_CASE("lambda policy parsing") {
  const auto rel = LambdaPolicy::parse("0.01*lmax");
  CHECK(rel.relative);
  CHECK(rel.value == 0.01);
  CHECK(rel.resolve(2.0) == 0.02);
  const auto fixed = LambdaPolicy::parse("0.05");
  CHECK_FALSE(fixed.relative);
  CHECK(fixed.resolve(2.0) == 0.05);
  CHECK(LambdaPolicy::parse(rel.to_string()).value == rel.value);
  CHECK(LambdaPolicy::parse(fixed.to_string()).relative == false);
  CHECK(code_of([] { LambdaPolicy::parse("lots"); }) == ErrorCode::InvalidInput);
  CHECK(code_of([] { LambdaPolicy::parse("-1"); }) == ErrorCode::InvalidInput);
}

TEST_CASE("run_disentanglement on planted factors") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  const std::size_t m = 400, p = 16;
  Tensor codes = Tensor::matrix(m, p);
  for (auto& v : codes.data()) v = static_cast<float>(nd(gen));
  std::vector<std::string> ids(m);
  for (std::size_t r = 0; r < m; ++r) ids[r] = "u" + std::to_string(r);

  FactorTable ft;
  ft.names = {"planted", "noise", "constant", "mix"};
  // factor rows in reverse order of the code rows, and only 300 of them
  for (std::size_t i = 0; i < 300; ++i) {
    const std::size_t r = m - 1 - i;
    ft.ids.push_back(ids[r]);
    ft.values.push_back(10.0 + 4.0 * codes(r, 5) + 1e-3 * nd(gen));
    ft.values.push_back(nd(gen));
    ft.values.push_back(2.5);
    double mix = 0;
    for (std::size_t j = 0; j < p; ++j) mix += codes(r, j);
    ft.values.push_back(mix);
  }
  FamilyMap fam{{"planted", "pitch"}, {"noise", "spectral"}, {"mix", "spectral"}};

  DisentangleConfig cfg;
  cfg.seed = 3;
  const DisentangleResult res = run_disentanglement(codes, ids, ft, fam, cfg);
  const auto& rep = res.report;
  CHECK(rep.n_samples == 300);
  CHECK(rep.n_dims == p);
  REQUIRE(rep.factors.size() == 3);
  REQUIRE(rep.skipped.size() == 1);
  CHECK(rep.skipped[0].name == "constant");
  CHECK(rep.unmapped_factors == std::vector<std::string>{"constant"});

  const FactorResult& planted = rep.factors[0];
  CHECK(planted.family == "pitch");
  CHECK(planted.r2 >= 0.99);
  CHECK(planted.completeness >= 0.9);
  CHECK(rep.factors[1].name == "noise");
  CHECK(rep.factors[1].r2 <= 0.1);
  CHECK(rep.factors[2].r2 >= 0.99);
  CHECK(rep.factors[2].completeness < 0.2);
  CHECK(res.importance.shape() == std::vector<std::size_t>{p, 4});
  for (std::size_t j = 0; j < p; ++j) CHECK(res.importance(j, 2) == 0.0f);
  CHECK(res.importance(5, 0) > 0.95f);  // target is standardized too

  CHECK(rep.top_r2.items.size() == 3);
  CHECK(rep.top_r2.items[0].value >= rep.top_r2.items[1].value);
  CHECK(rep.top_r2.items[1].value >= rep.top_r2.items[2].value);
  CHECK(rep.family_counts == std::map<std::string, std::size_t>{{"pitch", 1}, {"spectral", 2}});

  const auto again = run_disentanglement(codes, ids, ft, fam, cfg);
  CHECK(report_to_json(again.report, "t") == report_to_json(rep, "t"));

  DisentangleConfig insample = cfg;
  insample.in_sample = true;
  CHECK(run_disentanglement(codes, ids, ft, fam, insample).report.factors[1].r2 >= 0.0);

  auto bad = ft;
  bad.ids[0] = "ghost";
  const auto code = code_of([&] { run_disentanglement(codes, ids, bad, fam, cfg); });
  CHECK(code == ErrorCode::AlignmentError);
}

TEST_CASE("top_factors and family counting") {
  std::vector<FactorResult> rs;
  for (int i = 0; i < 14; ++i) {
    FactorResult r;
    r.name = "f" + std::to_string(i);
    r.family = i < 4 ? "pitch" : i < 10 ? "spectral" : "quality";
    r.r2 = i < 10 ? 0.9 - 0.01 * i : 0.1;
    r.completeness = 0.5;
    rs.push_back(r);
  }
  const TopList top = top_factors(rs, &FactorResult::r2, 10);
  REQUIRE(top.items.size() == 10);
  CHECK(top.items.front().name == "f0");
  CHECK(top.items.back().name == "f9");
  CHECK(top.mean == doctest::Approx(0.855));
  CHECK(top.std == doctest::Approx(std::sqrt(8.25e-4)));

  const TopList flat = top_factors(rs, &FactorResult::completeness, 10);
  CHECK(flat.items.front().name == "f0");
  CHECK(flat.std == 0.0);
  CHECK(top_factors(rs, &FactorResult::r2, 50).items.size() == 14);
}

TEST_CASE("report JSON round trip") {
  DisentangleReport r;
  r.run_id = "demo";
  r.layer = "layer6";
  r.sparsity = 0.9;
  r.lam_policy = "0.01*lmax";
  r.n_samples = 10;
  r.n_dims = 4;
  r.factors.push_back({"a", "pitch", 0.5, 0.25, 1.5, 2, 0.01, true, false});
  r.skipped.push_back({"b", "zero variance in the fit split"});
  r.unmapped_factors = {"b"};
  r.top_r2 = {{{"a", 0.5}}, 0.5, 0.0};
  r.top_completeness = {{{"a", 0.25}}, 0.25, 0.0};
  r.family_counts = {{"pitch", 1}};
  const std::string text = report_to_json(r, "2026-01-01T00:00:00Z");
  CHECK(text.find("\"created\": \"2026-01-01T00:00:00Z\"") != std::string::npos);
  const DisentangleReport back = report_from_json(text);
  CHECK(report_to_json(back, "2026-01-01T00:00:00Z") == text);

  DisentangleReport raw = r;
  raw.sparsity.reset();
  const std::string raw_text = report_to_json(raw, "x");
  CHECK(raw_text.find("\"sparsity\": null") != std::string::npos);
  CHECK_FALSE(report_from_json(raw_text).sparsity.has_value());
  CHECK(code_of([] { report_from_json("{}"); }) == ErrorCode::InvalidInput);
}
