#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "fracbump/dyadic.hpp"
#include "fracbump/grid.hpp"
#include "fracbump/orlicz.hpp"

namespace fracbump {

/// ∫ over one cell of |y|^{α - dim} dy, the self-interaction of a cell with itself.
/// 1D: 2(h/2)^α/α. 2D: the polar form 8 a^α/α ∫_0^{π/4} cos^{-α}θ dθ with a = h/2.
double self_cell_integral(const Domain& d, double alpha);

/// h^dim Σ_{j≠i} f_j |x_i - x_j|^{α-dim} + D f_i.
GridFunction fractional_integral(const GridFunction& f, double alpha);

/// The same quadrature with the factor (b_i - b_j)^m; the diagonal vanishes for m >= 1.
/// m = 0 shares the code path of fractional_integral and agrees with it bit for bit.
GridFunction commutator(const GridFunction& f, const GridFunction& b, int m, double alpha);

/// |<T f, g> - (-1)^m <f, T g>| / (|f|_2 |g|_2) with the plain discrete inner product.
double adjoint_defect(const GridFunction& f, const GridFunction& g, const GridFunction& b, int m,
                      double alpha);

/// Output of a sparse operator: value per cell and the family index of the maximising cube
/// (-1 outside every family cube).
struct SparseTrace {
  GridFunction value;
  std::vector<int> argmax;
};

/// Unstarred: sup_{Q∋x} |Q|^{α/dim} avg_Q(|b - b_Q|^m |f|).
/// Starred:   sup_{Q∋x} |Q|^{α/dim} |b(x) - b_Q|^m avg_Q|f|.
SparseTrace sparse_operator(const GridFunction& f, const GridFunction& b, int m, double alpha,
                            const SparseFamily& s, bool starred);

struct DominationResult {
  double ratio = 0.0;             // max over cells with R > 0 of |I^{b,m} f| / R
  std::size_t argmax_cell = 0;
  bool failed = false;            // R vanished where the commutator did not
  std::size_t family_sizes[2] = {0, 0};
  GridFunction numerator;
  GridFunction bound;             // R
};

/// Builds stopping families from |f| and |f| |b - b_root|^m and compares |I^{b,m} f| with
/// R = Σ_families (T f + T* f).
DominationResult sparse_domination_check(const GridFunction& f, const GridFunction& b, int m,
                                         double alpha, double tau);

/// max over x in Q, cubes Q and k in 0..m of
/// |b(x)-b_Q|^{m-k} avg_Q(|b-b_Q|^k|f|) / ((m+1)[|b(x)-b_Q|^m avg_Q|f| + avg_Q(|b-b_Q|^m|f|)]).
double reduction_inequality_ratio(const GridFunction& f, const GridFunction& b, int m,
                                  const std::vector<CubeRegion>& cubes);

/// sup_{Q∋x} |Q|^{β/dim} ‖f‖_{B,Q}; the plain average of |f| when B is absent.
GridFunction maximal(const GridFunction& f, double beta, const std::optional<YoungFunction>& b,
                     const std::vector<CubeRegion>& cubes);

struct KernelOscillation {
  double measured = 0.0;  // max |K(x, y) - K(x0, y0)| over the samples
  double center = 0.0;    // K(x0, y0) = (A r)^{-(dim-α)}
  double bound = 0.0;     // c (1/A) / (A r)^{dim-α}
  double c = 0.0;         // measured at A = 4
};

/// Samples y in B(y0, r) and x in B(x0, r) with y0 = -Ar/2 e1, x0 = Ar/2 e1. The balls must
/// fit in [-L, L]^dim. `samples` points per axis, boundary included.
KernelOscillation kernel_oscillation(int dim, double alpha, double r, double a, int samples,
                                     double half_width);

/// CSV with header `index,x[,y],value[,cube]`.
void write_trace_csv(std::ostream& os, const GridFunction& value,
                     const std::vector<std::string>* cube_labels = nullptr);

}  // namespace fracbump
