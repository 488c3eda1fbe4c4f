#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dynent/tensor.hpp"

using namespace dynent;

namespace {
double maxdiff(const CMat& a, const CMat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}
}  // namespace

TEST_CASE("kron dimensions and a hand value") {
  CMat a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  CMat k = kron(a, b);
  REQUIRE(k.rows() == 4);
  CHECK(k(0, 1) == Complex(1, 0));  // a00 * b01
  CHECK(k(2, 1) == Complex(3, 0));  // a10 * b01
  CHECK(k(2, 0) == Complex(0, 0));  // a10 * b00 = 3 * 0
}

TEST_CASE("permute_systems inverts and swaps a known product") {
  std::mt19937_64 rng(3);
  CMat a = random_hermitian(2, rng);
  CMat b = random_hermitian(3, rng);
  CMat ab = kron(a, b);
  CMat ba = permute_systems(ab, {2, 3}, {1, 0});
  CHECK(maxdiff(ba, kron(b, a)) < 1e-13);
  CHECK(maxdiff(permute_systems(ba, {3, 2}, {1, 0}), ab) < 1e-13);
}

TEST_CASE("partial_trace matches marginals of a product") {
  std::mt19937_64 rng(4);
  CMat a = random_hermitian(3, rng);
  CMat b = random_hermitian(2, rng);
  CMat ab = kron(a, b);
  CHECK(maxdiff(partial_trace(ab, {3, 2}, {0}), a * b.trace()) < 1e-12);
  CHECK(maxdiff(partial_trace(ab, {3, 2}, {1}), b * a.trace()) < 1e-12);
  // trace of everything
  CHECK(std::abs(partial_trace(ab, {3, 2}, {0}).trace() - ab.trace()) < 1e-12);
}

TEST_CASE("partial_transpose is an involution and acts locally") {
  std::mt19937_64 rng(5);
  CMat m = random_hermitian(12, rng);
  std::vector<int> dims = {2, 3, 2};
  CMat t = partial_transpose(m, dims, {1});
  CHECK(maxdiff(partial_transpose(t, dims, {1}), m) < 1e-14);
  // transposing all subsystems is the full transpose
  CMat full = partial_transpose(m, dims, {0, 1, 2});
  CHECK(maxdiff(full, m.transpose()) < 1e-14);
}

TEST_CASE("partial_trace with several kept subsystems keeps row-major order") {
  std::mt19937_64 rng(14);
  CMat a = random_hermitian(2, rng);
  CMat b = random_hermitian(3, rng);
  CMat c = random_hermitian(4, rng);
  CMat abc = kron(kron(a, b), c);
  // keep (0,2): result must be a (x) c * tr(b), in that order
  CMat got = partial_trace(abc, {2, 3, 4}, {0, 2});
  CHECK(maxdiff(got, kron(a, c) * b.trace()) < 1e-11);
  CHECK(maxdiff(got, ref::partial_trace(abc, {2, 3, 4}, {0, 2})) < 1e-12);
  // keep (1,2) on a generic matrix agrees with the serial oracle
  CMat m = random_hermitian(24, rng);
  CHECK(maxdiff(partial_trace(m, {2, 3, 4}, {1, 2}),
                ref::partial_trace(m, {2, 3, 4}, {1, 2})) < 1e-12);
}

TEST_CASE("realign round-trips") {
  std::mt19937_64 rng(6);
  CMat m = random_hermitian(6, rng);
  CHECK(maxdiff(unrealign(realign(m, 2, 3), 2, 3), m) < 1e-14);
}

TEST_CASE("parallel kernels agree with serial references") {
  std::mt19937_64 rng(7);
  CMat a = random_hermitian(5, rng);
  CMat b = random_hermitian(7, rng);
  CHECK(maxdiff(kron(a, b), ref::kron(a, b)) == 0.0);

  CMat m = random_hermitian(24, rng);
  std::vector<int> dims = {2, 3, 4};
  CHECK(maxdiff(partial_trace(m, dims, {1}),
                ref::partial_trace(m, dims, {1})) < 1e-13);
  CHECK(maxdiff(partial_transpose(m, dims, {0, 2}),
                ref::partial_transpose(m, dims, {0, 2})) == 0.0);
}

TEST_CASE("dims_product") {
  CHECK(dims_product({2, 3, 4}) == 24);
  CHECK(dims_product({}) == 1);
}
