#include <doctest.h>

#include <bit>
#include <cstring>
#include <random>
#include <vector>

#include "../support/oracles.hpp"
#include "saekit/kernels.hpp"

using namespace saekit::simd;

namespace {

std::vector<Isa> vector_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Avx2, Isa::Neon})
    if (isa_available(isa)) out.push_back(isa);
  return out;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

std::vector<double> random_doubles(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  std::vector<double> out(n);
  for (auto& v : out) v = d(gen);
  return out;
}

}  // namespace

TEST_CASE("scalar reference is always available and active by default only when nothing better exists") {
  CHECK(isa_available(Isa::Scalar));
  CHECK(&kernels_for(Isa::Scalar) == &detail::scalar_table());
  CHECK(kernels().isa == best_available_isa());
}

TEST_CASE("reductions agree with a long-double oracle") {
  std::mt19937_64 gen(5);
  const auto& k = kernels_for(Isa::Scalar);
  for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 31u, 768u, 2049u}) {
    const auto a = oracle::random_floats(gen, n), b = oracle::random_floats(gen, n);
    long double dot = 0, sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += (long double)a[i] * b[i];
      sq += ((long double)a[i] - b[i]) * ((long double)a[i] - b[i]);
    }
    CHECK(k.dot_f32(a.data(), b.data(), n) == doctest::Approx((double)dot).epsilon(1e-12));
    CHECK(k.sq_dist_f32(a.data(), b.data(), n) == doctest::Approx((double)sq).epsilon(1e-12));
  }
}

TEST_CASE("vector variants are bit-identical to the scalar reference") {
  const auto& ref = kernels_for(Isa::Scalar);
  const auto isas = vector_isas();
  if (isas.empty()) MESSAGE("no vector ISA on this host; only the scalar path is exercised");
  std::mt19937_64 gen(17);
  for (Isa isa : isas) {
    CAPTURE(to_string(isa));
    const auto& k = kernels_for(isa);
    for (std::size_t n = 0; n < 70; ++n) {
      CAPTURE(n);
      const auto a = oracle::random_floats(gen, n), b = oracle::random_floats(gen, n);
      const auto da = random_doubles(gen, n), db = random_doubles(gen, n);
      CHECK(same_bits(k.dot_f32(a.data(), b.data(), n), ref.dot_f32(a.data(), b.data(), n)));
      CHECK(same_bits(k.dot_f64(da.data(), db.data(), n), ref.dot_f64(da.data(), db.data(), n)));
      CHECK(same_bits(k.dot_mixed(a.data(), db.data(), n), ref.dot_mixed(a.data(), db.data(), n)));
      CHECK(same_bits(k.sq_dist_f32(a.data(), b.data(), n), ref.sq_dist_f32(a.data(), b.data(), n)));

      auto y1 = db, y2 = db;
      k.axpy_f32(0.37, a.data(), y1.data(), n);
      ref.axpy_f32(0.37, a.data(), y2.data(), n);
      CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);
      k.axpy_f64(-1.9, da.data(), y1.data(), n);
      ref.axpy_f64(-1.9, da.data(), y2.data(), n);
      CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

      const AdamCoefficients c{1e-3, 0.9, 0.999, 1e-8, 1.0 - 0.9 * 0.9, 1.0 - 0.999 * 0.999};
      auto p1 = a, p2 = a;
      auto m1 = da, m2 = da;
      std::vector<double> v1(n), v2(n);
      for (std::size_t i = 0; i < n; ++i) v1[i] = v2[i] = std::abs(db[i]);
      k.adam_update(c, p1.data(), db.data(), m1.data(), v1.data(), n);
      ref.adam_update(c, p2.data(), db.data(), m2.data(), v2.data(), n);
      CHECK(std::memcmp(p1.data(), p2.data(), n * sizeof(float)) == 0);
      CHECK(std::memcmp(m1.data(), m2.data(), n * sizeof(double)) == 0);
      CHECK(std::memcmp(v1.data(), v2.data(), n * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("select_isa switches the active table and rejects unavailable variants") {
  const Isa original = kernels().isa;
  select_isa(Isa::Scalar);
  CHECK(kernels().isa == Isa::Scalar);
  for (Isa isa : {Isa::Avx2, Isa::Neon})
    if (!isa_available(isa)) CHECK_THROWS(select_isa(isa));
  select_isa(original);
  CHECK(kernels().isa == original);
}
