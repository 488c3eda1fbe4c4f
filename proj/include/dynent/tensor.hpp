#pragma once

#include <vector>

#include "dynent/linalg.hpp"

namespace dynent {

// Subsystem indexing is zero-based and row-major in kron order: for
// dims = {d0, d1, ...} the composite basis index is i0*d1*d2*... + i1*d2*... + ...
// Every operation below takes dims in that order.

int dims_product(const std::vector<int>& dims);

CMat kron(const CMat& a, const CMat& b);

// Reorder subsystems: perm[k] is the old position of the subsystem placed at
// new position k. dims are the dims of m in its current order.
CMat permute_systems(const CMat& m, const std::vector<int>& dims,
                     const std::vector<int>& perm);

// Trace out all subsystems not in `keep`; kept subsystems stay in their
// original relative order.
CMat partial_trace(const CMat& m, const std::vector<int>& dims,
                   const std::vector<int>& keep);

// Transpose the subsystems listed in `transposed`.
CMat partial_transpose(const CMat& m, const std::vector<int>& dims,
                       const std::vector<int>& transposed);

// Realignment map used by the operator Schmidt decomposition: for m acting on
// A (dim da) tensor B (dim db), R[(a,a'),(b,b')] = m[(a,b),(a',b')].
CMat realign(const CMat& m, int da, int db);
CMat unrealign(const CMat& r, int da, int db);

// Serial reference implementations (no OpenMP); kept for kernel tests and the
// benchmark target.
namespace ref {
CMat kron(const CMat& a, const CMat& b);
CMat partial_trace(const CMat& m, const std::vector<int>& dims,
                   const std::vector<int>& keep);
CMat partial_transpose(const CMat& m, const std::vector<int>& dims,
                       const std::vector<int>& transposed);
}  // namespace ref

}  // namespace dynent
