#include "dynent/channel.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace dynent {

void BipartiteChannel::validate(double tol) const {
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("channel: dimension < 1");
  if (choi.rows() != d() || choi.cols() != d())
    throw std::invalid_argument("channel: Choi size does not match dims");
  if (!is_finite(choi)) throw std::invalid_argument("channel: non-finite Choi");
  if (!is_hermitian(choi, 1e-8))
    throw std::invalid_argument("channel: Choi not Hermitian");
  if (std::abs(choi.trace().real() - 1.0) > tol)
    throw std::invalid_argument("channel: Choi trace != 1");
  if (min_eigenvalue(hermitize(choi), 1e-6) < -1e-8)
    throw std::invalid_argument("channel: Choi not positive semidefinite");
  CMat marg = partial_trace(choi, choi_dims(), {0, 1});
  CMat target = CMat::Identity(d_in(), d_in()) / static_cast<double>(d_in());
  if ((marg - target).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("channel: not trace preserving (marginal != I/d_in)");
}

BipartiteChannel make_channel(const CMat& choi, const std::array<int, 4>& dims,
                              bool certified_separable) {
  BipartiteChannel c{hermitize(choi), dims, certified_separable};
  c.validate();
  return c;
}

BipartiteChannel from_kraus(const std::vector<CMat>& kraus,
                            const std::array<int, 4>& dims) {
  const int din = dims[0] * dims[1], dout = dims[2] * dims[3];
  if (kraus.empty()) throw std::invalid_argument("from_kraus: empty Kraus set");
  CMat acc = CMat::Zero(din, din);
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din)
      throw std::invalid_argument("from_kraus: Kraus operator shape mismatch");
    acc += k.adjoint() * k;
  }
  if ((acc - CMat::Identity(din, din)).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("from_kraus: Kraus set not trace preserving");
  // J = (1/din) sum_i (I (x) K_i) Omega (I (x) K_i)^dag with Omega the
  // unnormalized joint maximally entangled operator on (ref, in).
  CMat j = CMat::Zero(din * dout, din * dout);
  for (const auto& k : kraus) {
    // vector v = sum_x |x> (x) K|x>
    CMat v = CMat::Zero(din * dout, 1);
    for (int x = 0; x < din; ++x) v.block(x * dout, 0, dout, 1) += k.col(x);
    j += v * v.adjoint();
  }
  j /= static_cast<double>(din);
  return make_channel(j, dims);
}

BipartiteChannel identity_channel(int a0, int b0) {
  const int d = a0 * b0;
  return from_kraus({CMat::Identity(d, d)}, {a0, b0, a0, b0});
}

BipartiteChannel swap_channel(int k) {
  if (k < 2) throw std::invalid_argument("swap_channel: k < 2");
  CMat f = CMat::Zero(k * k, k * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) f(i * k + j, j * k + i) = 1.0;
  return from_kraus({f}, {k, k, k, k});
}

BipartiteChannel depolarizing_channel(int a0, int b0, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing: p out of range");
  BipartiteChannel id = identity_channel(a0, b0);
  const int d = a0 * b0;
  CMat mixed = CMat::Identity(d * d, d * d) / static_cast<double>(d * d);
  return make_channel((1.0 - p) * id.choi + p * mixed, id.dims);
}

namespace {
CMat random_isometry(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat z(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) z(i, j) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = CMat(qr.householderQ()).leftCols(cols);
  CMat r = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
  for (int j = 0; j < cols; ++j) {
    Complex ph = r(j, j) / std::abs(r(j, j));
    q.col(j) *= ph;
  }
  return q;
}

std::vector<CMat> isometry_to_kraus(const CMat& v, int dout, int denv) {
  // v: (dout*denv) x din with env the trailing factor
  std::vector<CMat> ks;
  const int din = static_cast<int>(v.cols());
  for (int e = 0; e < denv; ++e) {
    CMat k(dout, din);
    for (int o = 0; o < dout; ++o) k.row(o) = v.row(o * denv + e);
    ks.push_back(k);
  }
  return ks;
}
}  // namespace

BipartiteChannel random_channel(const std::array<int, 4>& dims, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int din = dims[0] * dims[1], dout = dims[2] * dims[3];
  const int denv = dout;
  CMat v = random_isometry(dout * denv, din, rng);
  return from_kraus(isometry_to_kraus(v, dout, denv), dims);
}

BipartiteChannel random_separable_channel(const std::array<int, 4>& dims,
                                          uint64_t seed, int terms) {
  if (terms < 1) throw std::invalid_argument("random_separable_channel: terms < 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  CMat j = CMat::Zero(dims[0] * dims[1] * dims[2] * dims[3],
                      dims[0] * dims[1] * dims[2] * dims[3]);
  double wsum = 0.0;
  std::vector<double> w(terms);
  for (int t = 0; t < terms; ++t) {
    w[t] = unif(rng);
    wsum += w[t];
  }
  for (int t = 0; t < terms; ++t) {
    // local channels E_A: A0->A1 and F_B: B0->B1 via random isometries
    CMat va = random_isometry(dims[2] * dims[2], dims[0], rng);
    CMat vb = random_isometry(dims[3] * dims[3], dims[1], rng);
    auto ka = isometry_to_kraus(va, dims[2], dims[2]);
    auto kb = isometry_to_kraus(vb, dims[3], dims[3]);
    std::vector<CMat> prod;
    for (const auto& a : ka)
      for (const auto& b : kb) prod.push_back(kron(a, b));
    BipartiteChannel c = from_kraus(prod, dims);
    j += (w[t] / wsum) * c.choi;
  }
  return make_channel(j, dims, /*certified_separable=*/true);
}

DensityOperator maximally_entangled(int k) {
  if (k < 1) throw std::invalid_argument("maximally_entangled: k < 1");
  CVec v = CVec::Zero(k * k);
  for (int i = 0; i < k; ++i) v(i * k + i) = 1.0 / std::sqrt(static_cast<double>(k));
  return pure_state(v, {k, k});
}

DensityOperator isotropic_state(int k, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("isotropic_state: p out of range");
  CMat phi = maximally_entangled(k).matrix;
  CMat rest = (CMat::Identity(k * k, k * k) - phi) / static_cast<double>(k * k - 1);
  return make_density(p * phi + (1.0 - p) * rest, {k, k});
}

CMat choi_partial_transpose(const CMat& j, const std::array<int, 4>& dims) {
  return partial_transpose(j, {dims[0], dims[1], dims[2], dims[3]}, {1, 3});
}

PptFlag is_ppt(const BipartiteChannel& c) {
  double e = min_eigenvalue(hermitize(choi_partial_transpose(c.choi, c.dims)), 1e-6);
  return {e >= -1e-9, e};
}

CMat choi_apply(const CMat& j, const std::array<int, 4>& dims, const CMat& rho,
                const std::vector<int>& rho_dims) {
  if (rho_dims.size() < 2 || rho_dims[0] != dims[0] || rho_dims[1] != dims[1])
    throw std::invalid_argument("choi_apply: state dims do not match channel input");
  const int din = dims[0] * dims[1], dout = dims[2] * dims[3];
  int dr = 1;
  for (size_t i = 2; i < rho_dims.size(); ++i) dr *= rho_dims[i];
  if (rho.rows() != static_cast<long>(din) * dr)
    throw std::invalid_argument("choi_apply: state matrix size mismatch");

  // Work on systems ordered (in, R, out).
  CMat lhs = kron(partial_transpose(rho, {din, dr}, {0}), CMat::Identity(dout, dout));
  CMat rhs = kron(j, CMat::Identity(dr, dr));           // (in, out, R)
  rhs = permute_systems(rhs, {din, dout, dr}, {0, 2, 1});  // -> (in, R, out)
  CMat prod = lhs * rhs;
  CMat out = partial_trace(prod, {din, dr, dout}, {1, 2});  // (R, out)
  out = permute_systems(out, {dr, dout}, {1, 0});           // (out, R)
  return static_cast<double>(din) * out;
}

DensityOperator apply(const BipartiteChannel& c, const DensityOperator& state) {
  CMat out = choi_apply(c.choi, c.dims, state.matrix, state.dims);
  std::vector<int> odims = {c.dims[2], c.dims[3]};
  for (size_t i = 2; i < state.dims.size(); ++i) odims.push_back(state.dims[i]);
  return make_density(hermitize(out), odims);
}

BipartiteChannel mix_channels(const std::vector<BipartiteChannel>& cs,
                              const std::vector<double>& weights) {
  if (cs.empty() || cs.size() != weights.size())
    throw std::invalid_argument("mix_channels: size mismatch");
  CMat j = CMat::Zero(cs[0].choi.rows(), cs[0].choi.cols());
  double wsum = 0.0;
  bool sep = true;
  for (size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].dims != cs[0].dims)
      throw std::invalid_argument("mix_channels: dims mismatch");
    if (weights[i] < -1e-12) throw std::invalid_argument("mix_channels: negative weight");
    j += weights[i] * cs[i].choi;
    wsum += weights[i];
    sep = sep && cs[i].certified_separable;
  }
  return make_channel(j / wsum, cs[0].dims, sep);
}

BipartiteChannel tensor_channels(const BipartiteChannel& n,
                                 const BipartiteChannel& m) {
  CMat j = kron(n.choi, m.choi);
  // (A0,B0,A1,B1,A0',B0',A1',B1') -> (A0,A0',B0,B0',A1,A1',B1,B1')
  std::vector<int> dims = {n.dims[0], n.dims[1], n.dims[2], n.dims[3],
                           m.dims[0], m.dims[1], m.dims[2], m.dims[3]};
  j = permute_systems(j, dims, {0, 4, 1, 5, 2, 6, 3, 7});
  std::array<int, 4> nd = {n.dims[0] * m.dims[0], n.dims[1] * m.dims[1],
                           n.dims[2] * m.dims[2], n.dims[3] * m.dims[3]};
  return make_channel(j, nd, n.certified_separable && m.certified_separable);
}

OperatorSchmidt operator_schmidt(const CMat& u, int da, int db) {
  if (u.rows() != static_cast<long>(da) * db || u.cols() != u.rows())
    throw std::invalid_argument("operator_schmidt: dims mismatch");
  if ((u * u.adjoint() - CMat::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff() >
      1e-9)
    throw std::invalid_argument("operator_schmidt: input not unitary");
  CMat r = realign(u, da, db);
  Eigen::JacobiSVD<CMat> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  OperatorSchmidt out;
  out.coeffs = svd.singularValues();
  const long k = out.coeffs.size();
  for (long j = 0; j < k; ++j) {
    CMat a(da, da), b(db, db);
    for (int x = 0; x < da; ++x)
      for (int y = 0; y < da; ++y) a(x, y) = svd.matrixU()(x * da + y, j);
    for (int x = 0; x < db; ++x)
      for (int y = 0; y < db; ++y) b(x, y) = std::conj(svd.matrixV()(x * db + y, j));
    out.A.push_back(a);
    out.B.push_back(b);
  }
  return out;
}

std::string channel_to_json(const BipartiteChannel& c) {
  nlohmann::json j;
  j["dims"] = {c.dims[0], c.dims[1], c.dims[2], c.dims[3]};
  const long d = c.choi.rows();
  std::vector<std::vector<double>> re(d, std::vector<double>(d)),
      im(d, std::vector<double>(d));
  for (long r = 0; r < d; ++r)
    for (long col = 0; col < d; ++col) {
      re[r][col] = c.choi(r, col).real();
      im[r][col] = c.choi(r, col).imag();
    }
  j["choi_re"] = re;
  j["choi_im"] = im;
  return j.dump();
}

BipartiteChannel channel_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("channel JSON parse error: ") + e.what());
  }
  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 4)
    throw std::invalid_argument("channel JSON: missing or malformed \"dims\"");
  std::array<int, 4> dims;
  for (int i = 0; i < 4; ++i) dims[i] = j["dims"][i].get<int>();
  const long d = static_cast<long>(dims[0]) * dims[1] * dims[2] * dims[3];
  for (const char* key : {"choi_re", "choi_im"}) {
    if (!j.contains(key) || !j[key].is_array() ||
        static_cast<long>(j[key].size()) != d)
      throw std::invalid_argument(std::string("channel JSON: missing or malformed \"") +
                                  key + "\"");
  }
  CMat choi(d, d);
  for (long r = 0; r < d; ++r) {
    const auto& rr = j["choi_re"][r];
    const auto& ri = j["choi_im"][r];
    if (static_cast<long>(rr.size()) != d || static_cast<long>(ri.size()) != d)
      throw std::invalid_argument("channel JSON: row length mismatch");
    for (long c = 0; c < d; ++c)
      choi(r, c) = Complex(rr[c].get<double>(), ri[c].get<double>());
  }
  return make_channel(choi, dims);
}

BipartiteChannel load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open channel file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return channel_from_json(ss.str());
}

void save_channel(const BipartiteChannel& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write channel file: " + path);
  out << channel_to_json(c);
}

}  // namespace dynent
