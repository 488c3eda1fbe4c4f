#include "dynent/tensor.hpp"

#include <numeric>
#include <stdexcept>

namespace dynent {

namespace {

void check_dims(const CMat& m, const std::vector<int>& dims) {
  if (m.rows() != m.cols()) throw std::invalid_argument("tensor op: matrix not square");
  if (dims_product(dims) != m.rows())
    throw std::invalid_argument("tensor op: dims inconsistent with matrix size");
}

std::vector<long> strides_of(const std::vector<int>& dims) {
  std::vector<long> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k)
    s[k] = s[k + 1] * dims[k + 1];
  return s;
}

}  // namespace

int dims_product(const std::vector<int>& dims) {
  int p = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("subsystem dimension must be >= 1");
    p *= d;
  }
  return p;
}

CMat kron(const CMat& a, const CMat& b) {
  const long ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  CMat out(ar * br, ac * bc);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < ar; ++i)
    for (long j = 0; j < ac; ++j)
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
  return out;
}

CMat permute_systems(const CMat& m, const std::vector<int>& dims,
                     const std::vector<int>& perm) {
  check_dims(m, dims);
  if (perm.size() != dims.size())
    throw std::invalid_argument("permute_systems: perm size mismatch");
  const int n = static_cast<int>(dims.size());
  const long D = m.rows();
  std::vector<int> new_dims(n);
  for (int k = 0; k < n; ++k) new_dims[k] = dims[perm[k]];
  auto old_strides = strides_of(dims);
  auto new_strides = strides_of(new_dims);
  std::vector<long> map(D);
  for (long x = 0; x < D; ++x) {
    long rem = x, old_idx = 0;
    for (int k = 0; k < n; ++k) {
      long digit = rem / new_strides[k];
      rem %= new_strides[k];
      old_idx += digit * old_strides[perm[k]];
    }
    map[x] = old_idx;
  }
  CMat out(D, D);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < D; ++i)
    for (long j = 0; j < D; ++j) out(i, j) = m(map[i], map[j]);
  return out;
}

CMat partial_trace(const CMat& m, const std::vector<int>& dims,
                   const std::vector<int>& keep) {
  check_dims(m, dims);
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw std::invalid_argument("partial_trace: bad keep index");
    kept[k] = true;
  }
  long Dk = 1, Dt = 1;
  for (int k = 0; k < n; ++k) (kept[k] ? Dk : Dt) *= dims[k];
  auto strides = strides_of(dims);

  // Base offsets of the kept and traced multi-indices in the full index.
  std::vector<long> koff(Dk, 0), toff(Dt, 0);
  {
    long nk = 1, nt = 1;
    // Row-major: earlier subsystems are more significant in the kept index.
    for (int k = 0; k < n; ++k) {
      auto& off = kept[k] ? koff : toff;
      long& cnt = kept[k] ? nk : nt;
      long blk = cnt;
      cnt *= dims[k];
      for (long b = blk - 1; b >= 0; --b) {
        long base = off[b];
        for (long d = dims[k] - 1; d >= 0; --d)
          off[b * dims[k] + d] = base + d * strides[k];
      }
    }
  }
  CMat out = CMat::Zero(Dk, Dk);
#pragma omp parallel for schedule(static)
  for (long a = 0; a < Dk; ++a)
    for (long b = 0; b < Dk; ++b) {
      Complex s = 0.0;
      for (long t = 0; t < Dt; ++t) s += m(koff[a] + toff[t], koff[b] + toff[t]);
      out(a, b) = s;
    }
  return out;
}

CMat partial_transpose(const CMat& m, const std::vector<int>& dims,
                       const std::vector<int>& transposed) {
  check_dims(m, dims);
  const int n = static_cast<int>(dims.size());
  std::vector<bool> tr(n, false);
  for (int k : transposed) {
    if (k < 0 || k >= n) throw std::invalid_argument("partial_transpose: bad index");
    tr[k] = true;
  }
  const long D = m.rows();
  auto strides = strides_of(dims);
  CMat out(D, D);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < D; ++i) {
    std::vector<long> idig(n);
    long rem = i;
    for (int k = 0; k < n; ++k) {
      idig[k] = rem / strides[k];
      rem %= strides[k];
    }
    for (long j = 0; j < D; ++j) {
      long jrem = j, ii = 0, jj = 0;
      for (int k = 0; k < n; ++k) {
        long jd = jrem / strides[k];
        jrem %= strides[k];
        if (tr[k]) {
          ii += jd * strides[k];
          jj += idig[k] * strides[k];
        } else {
          ii += idig[k] * strides[k];
          jj += jd * strides[k];
        }
      }
      out(ii, jj) = m(i, j);
    }
  }
  return out;
}

CMat realign(const CMat& m, int da, int db) {
  if (m.rows() != static_cast<long>(da) * db || m.cols() != m.rows())
    throw std::invalid_argument("realign: dims mismatch");
  CMat r(static_cast<long>(da) * da, static_cast<long>(db) * db);
  for (int a = 0; a < da; ++a)
    for (int ap = 0; ap < da; ++ap)
      for (int b = 0; b < db; ++b)
        for (int bp = 0; bp < db; ++bp)
          r(a * da + ap, b * db + bp) = m(a * db + b, ap * db + bp);
  return r;
}

CMat unrealign(const CMat& r, int da, int db) {
  if (r.rows() != static_cast<long>(da) * da || r.cols() != static_cast<long>(db) * db)
    throw std::invalid_argument("unrealign: dims mismatch");
  CMat m(static_cast<long>(da) * db, static_cast<long>(da) * db);
  for (int a = 0; a < da; ++a)
    for (int ap = 0; ap < da; ++ap)
      for (int b = 0; b < db; ++b)
        for (int bp = 0; bp < db; ++bp)
          m(a * db + b, ap * db + bp) = r(a * da + ap, b * db + bp);
  return m;
}

namespace ref {

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      for (long k = 0; k < b.rows(); ++k)
        for (long l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

CMat partial_trace(const CMat& m, const std::vector<int>& dims,
                   const std::vector<int>& keep) {
  // Element-wise summation oracle: walk every full index pair, accumulate
  // entries whose traced digits coincide.
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  for (int k : keep) kept[k] = true;
  long Dk = 1;
  for (int k = 0; k < n; ++k)
    if (kept[k]) Dk *= dims[k];
  const long D = m.rows();
  auto digits = [&](long x) {
    std::vector<long> dg(n);
    for (int k = n - 1; k >= 0; --k) {
      dg[k] = x % dims[k];
      x /= dims[k];
    }
    return dg;
  };
  auto kept_index = [&](const std::vector<long>& dg) {
    long idx = 0;
    for (int k = 0; k < n; ++k)
      if (kept[k]) idx = idx * dims[k] + dg[k];
    return idx;
  };
  CMat out = CMat::Zero(Dk, Dk);
  for (long i = 0; i < D; ++i) {
    auto di = digits(i);
    for (long j = 0; j < D; ++j) {
      auto dj = digits(j);
      bool match = true;
      for (int k = 0; k < n; ++k)
        if (!kept[k] && di[k] != dj[k]) match = false;
      if (match) out(kept_index(di), kept_index(dj)) += m(i, j);
    }
  }
  return out;
}

CMat partial_transpose(const CMat& m, const std::vector<int>& dims,
                       const std::vector<int>& transposed) {
  const int n = static_cast<int>(dims.size());
  std::vector<bool> tr(n, false);
  for (int k : transposed) tr[k] = true;
  const long D = m.rows();
  auto digits = [&](long x) {
    std::vector<long> dg(n);
    for (int k = n - 1; k >= 0; --k) {
      dg[k] = x % dims[k];
      x /= dims[k];
    }
    return dg;
  };
  auto index = [&](const std::vector<long>& dg) {
    long idx = 0;
    for (int k = 0; k < n; ++k) idx = idx * dims[k] + dg[k];
    return idx;
  };
  CMat out(D, D);
  for (long i = 0; i < D; ++i)
    for (long j = 0; j < D; ++j) {
      auto di = digits(i), dj = digits(j);
      for (int k = 0; k < n; ++k)
        if (tr[k]) std::swap(di[k], dj[k]);
      out(index(di), index(dj)) = m(i, j);
    }
  return out;
}

}  // namespace ref
}  // namespace dynent
