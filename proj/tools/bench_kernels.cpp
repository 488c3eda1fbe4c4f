// Compares the OpenMP tensor kernels against the serial reference
// implementations on the operand shapes the solvers actually hit.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "dynent/linalg.hpp"
#include "dynent/tensor.hpp"

using namespace dynent;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e100;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, seconds(t0, t1));
  }
  return best;
}

}  // namespace

int main() {
  std::mt19937_64 rng(17);
  std::printf("%-28s %10s %10s %8s %10s\n", "kernel", "parallel", "serial",
              "speedup", "max|diff|");

  struct Shape { int da, db; };
  for (Shape s : {Shape{16, 16}, Shape{64, 16}, Shape{64, 64}}) {
    CMat a = random_hermitian(s.da, rng);
    CMat b = random_hermitian(s.db, rng);
    CMat out_p, out_s;
    double tp = time_best_of(3, [&] { out_p = kron(a, b); });
    double ts = time_best_of(3, [&] { out_s = ref::kron(a, b); });
    std::printf("%-28s %9.4fs %9.4fs %7.2fx %10.2e\n",
                ("kron " + std::to_string(s.da) + "x" + std::to_string(s.db))
                    .c_str(),
                tp, ts, ts / tp, (out_p - out_s).cwiseAbs().maxCoeff());
  }

  for (int d : {3, 4, 5}) {
    std::vector<int> dims = {d, d, d, d};
    CMat m = random_hermitian(d * d * d * d, rng);
    CMat out_p, out_s;
    double tp = time_best_of(3, [&] { out_p = partial_trace(m, dims, {0, 1}); });
    double ts =
        time_best_of(3, [&] { out_s = ref::partial_trace(m, dims, {0, 1}); });
    std::printf("%-28s %9.4fs %9.4fs %7.2fx %10.2e\n",
                ("partial_trace d=" + std::to_string(d)).c_str(), tp, ts,
                ts / tp, (out_p - out_s).cwiseAbs().maxCoeff());

    double tp2 =
        time_best_of(3, [&] { out_p = partial_transpose(m, dims, {1, 3}); });
    double ts2 = time_best_of(
        3, [&] { out_s = ref::partial_transpose(m, dims, {1, 3}); });
    std::printf("%-28s %9.4fs %9.4fs %7.2fx %10.2e\n",
                ("partial_transpose d=" + std::to_string(d)).c_str(), tp2, ts2,
                ts2 / tp2, (out_p - out_s).cwiseAbs().maxCoeff());
  }
  return 0;
}
