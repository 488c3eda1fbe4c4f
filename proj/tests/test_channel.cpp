#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "dynent/channel.hpp"

using namespace dynent;

namespace {
double maxdiff(const CMat& a, const CMat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}
}  // namespace

TEST_CASE("builtin channels validate and have the right shapes") {
  for (const BipartiteChannel& c :
       {identity_channel(2, 3), swap_channel(2), swap_channel(3),
        depolarizing_channel(2, 2, 0.3), random_channel({2, 2, 3, 2}, 5),
        random_separable_channel({2, 2, 2, 2}, 9, 3)}) {
    CHECK_NOTHROW(c.validate());
    CHECK(std::abs(c.choi.trace().real() - 1.0) < 1e-9);
  }
  CHECK(random_separable_channel({2, 2, 2, 2}, 9, 3).certified_separable);
}

TEST_CASE("swap channel exchanges the parties and its Choi is pure") {
  BipartiteChannel f = swap_channel(2);
  Eigen::SelfAdjointEigenSolver<CMat> es(f.choi);
  int rank = 0;
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-10) ++rank;
  CHECK(rank == 1);
  // F applied to any input swaps A and B
  std::mt19937_64 rng(3);
  DensityOperator in = random_density(4, rng);
  in.dims = {2, 2};
  DensityOperator out = apply(f, in);
  CHECK(maxdiff(out.matrix, permute_systems(in.matrix, {2, 2}, {1, 0})) <
        1e-10);
}

TEST_CASE("identity channel Choi applies as the identity") {
  BipartiteChannel id = identity_channel(2, 2);
  std::mt19937_64 rng(8);
  DensityOperator in = random_density(4, rng);
  in.dims = {2, 2};
  DensityOperator out = apply(id, in);
  CHECK(maxdiff(out.matrix, in.matrix) < 1e-10);
}

TEST_CASE("choi_apply is linear and respects a reference system") {
  BipartiteChannel id = identity_channel(2, 2);
  std::mt19937_64 rng(10);
  DensityOperator in = random_density(8, rng);
  in.dims = {2, 2, 2};  // with a qubit reference
  CMat out = choi_apply(id.choi, id.dims, in.matrix, in.dims);
  CHECK(maxdiff(out, in.matrix) < 1e-10);
  CMat out2 = choi_apply(2.0 * id.choi, id.dims, in.matrix, in.dims);
  CHECK(maxdiff(out2, 2.0 * in.matrix) < 1e-10);
}

TEST_CASE("trace preservation invariant is enforced") {
  BipartiteChannel f = swap_channel(2);
  BipartiteChannel bad = f;
  bad.choi(0, 0) += 0.05;
  bad.choi(5, 5) -= 0.05;  // keeps trace 1, breaks the marginal
  CHECK_THROWS(bad.validate());
}

TEST_CASE("PPT flag: identity is NPT, depolarizing at high noise is PPT") {
  CHECK(!is_ppt(swap_channel(2)).is_ppt_across_AB);
  CHECK(is_ppt(depolarizing_channel(2, 2, 1.0)).is_ppt_across_AB);
}

TEST_CASE("isotropic state PT eigenvalue changes sign at p = 1/K") {
  for (int k : {2, 3}) {
    DensityOperator just_below = isotropic_state(k, 1.0 / k - 1e-6);
    DensityOperator just_above = isotropic_state(k, 1.0 / k + 1e-6);
    CHECK(min_eigenvalue(partial_transpose(just_below.matrix, just_below.dims,
                                           {1})) > -1e-9);
    CHECK(min_eigenvalue(partial_transpose(just_above.matrix, just_above.dims,
                                           {1})) < 0.0);
  }
}

TEST_CASE("mix and tensor") {
  BipartiteChannel a = swap_channel(2);
  BipartiteChannel b = depolarizing_channel(2, 2, 0.5);
  BipartiteChannel m = mix_channels({a, b}, {0.25, 0.75});
  CHECK(maxdiff(m.choi, 0.25 * a.choi + 0.75 * b.choi) < 1e-12);

  BipartiteChannel t = tensor_channels(identity_channel(2, 2), swap_channel(2));
  CHECK(t.dims == std::array<int, 4>{4, 4, 4, 4});
  CHECK_NOTHROW(t.validate());
  // applying the tensor to a product input factorizes
  std::mt19937_64 rng(12);
  DensityOperator x = random_density(4, rng);
  x.dims = {2, 2};
  DensityOperator y = random_density(4, rng);
  y.dims = {2, 2};
  CMat joint = kron(x.matrix, y.matrix);
  // reorder (A0 B0 A0' B0') from (A0 B0)(A0' B0') product
  CMat in = permute_systems(joint, {2, 2, 2, 2}, {0, 2, 1, 3});
  DensityOperator din = make_density(in, {4, 4});
  DensityOperator out = apply(t, din);
  DensityOperator ox = apply(identity_channel(2, 2), x);
  DensityOperator oy = apply(swap_channel(2), y);
  CMat want = permute_systems(kron(ox.matrix, oy.matrix), {2, 2, 2, 2},
                              {0, 2, 1, 3});
  CHECK(maxdiff(out.matrix, want) < 1e-10);
}

TEST_CASE("from_kraus of a unitary gives a TP channel with pure Choi") {
  std::mt19937_64 rng(21);
  CMat u = random_unitary(4, rng);
  BipartiteChannel c = from_kraus({u}, {2, 2, 2, 2});
  CHECK_NOTHROW(c.validate());
  Eigen::SelfAdjointEigenSolver<CMat> es(c.choi);
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("operator Schmidt decomposition of the swap unitary") {
  // SWAP on 2x2 has 4 equal Schmidt coefficients 1/2 * 2 = ... the
  // coefficients are all equal and the decomposition reassembles the input.
  CMat swap = CMat::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = 1;
  swap(1, 2) = swap(2, 1) = 1;
  OperatorSchmidt os = operator_schmidt(swap, 2, 2);
  REQUIRE(os.coeffs.size() == 4);
  CHECK(os.coeffs(0) == doctest::Approx(os.coeffs(3)).epsilon(1e-10));
  CMat recon = CMat::Zero(4, 4);
  for (int j = 0; j < 4; ++j)
    recon += os.coeffs(j) * kron(os.A[j], os.B[j]);
  CHECK(maxdiff(recon, swap) < 1e-10);
}

TEST_CASE("JSON round trip and file IO") {
  BipartiteChannel c = random_channel({2, 2, 2, 2}, 33);
  BipartiteChannel d = channel_from_json(channel_to_json(c));
  CHECK(maxdiff(c.choi, d.choi) < 1e-12);
  CHECK(c.dims == d.dims);

  std::string path = (std::filesystem::temp_directory_path() /
                      "dynent_test_channel.json").string();
  save_channel(c, path);
  BipartiteChannel e = load_channel(path);
  CHECK(maxdiff(c.choi, e.choi) < 1e-12);
  std::filesystem::remove(path);
}
