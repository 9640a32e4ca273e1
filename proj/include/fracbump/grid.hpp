#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracbump {

/// Thrown for violated preconditions and malformed inputs across the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point of the box; only the first `dim` coordinates are meaningful.
using Point = std::array<double, 2>;

/// Uniform cell-centred grid on the box [-L, L]^dim.
class Domain {
 public:
  Domain(int dim, double half_width, std::size_t n_cells);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  std::size_t n_cells() const { return n_cells_; }
  double h() const { return 2.0 * half_width_ / static_cast<double>(n_cells_); }
  /// Volume of one cell, h^dim.
  double cell_volume() const;
  /// Total number of cells, N^dim.
  std::size_t size() const;

  /// Centre of the cell with per-axis index `i` (and `j` in 2D).
  double center(std::size_t i) const {
    return -half_width_ + (static_cast<double>(i) + 0.5) * h();
  }
  /// Flat index = j * N + i.
  std::size_t flat(std::size_t i, std::size_t j = 0) const { return j * n_cells_ + i; }
  std::array<std::size_t, 2> unflat(std::size_t idx) const {
    return {idx % n_cells_, idx / n_cells_};
  }
  Point point(std::size_t idx) const;

  /// Index of the cell containing coordinate x along one axis (clamped).
  std::size_t cell_of(double x) const;

  /// Same grid refined by a factor of two per side.
  Domain refined() const { return Domain(dim_, half_width_, 2 * n_cells_); }

  bool operator==(const Domain&) const = default;

 private:
  int dim_;
  double half_width_;
  std::size_t n_cells_;
};

/// A contiguous cube of cells: origin cell (i0, j0) and `side` cells per axis.
class CubeRegion {
 public:
  CubeRegion(const Domain& domain, std::array<std::size_t, 2> origin, std::size_t side);

  /// The cube [lo, lo + side_length)^dim, snapped to cells.
  static CubeRegion from_box(const Domain& domain, Point lo, double side_length);
  /// The whole box.
  static CubeRegion whole(const Domain& domain);

  const Domain& domain() const { return domain_; }
  std::array<std::size_t, 2> origin() const { return origin_; }
  std::size_t side() const { return side_; }
  std::size_t cell_count() const;
  double side_length() const { return static_cast<double>(side_) * domain_.h(); }
  double measure() const { return static_cast<double>(cell_count()) * domain_.cell_volume(); }
  bool contains(std::size_t idx) const;
  /// Flat indices of the cells, row-major.
  std::vector<std::size_t> cells() const;
  /// Centre point of the cube.
  Point center() const;

  /// `depth:i[:j]` when the cube is a dyadic cube of the box lattice,
  /// otherwise `@i0[,j0]+side`.
  std::string label() const;

  bool operator==(const CubeRegion& o) const {
    return origin_ == o.origin_ && side_ == o.side_;
  }

  template <typename Fn>
  void for_each_cell(Fn&& fn) const {
    const std::size_t jn = domain_.dim() == 2 ? side_ : 1;
    for (std::size_t dj = 0; dj < jn; ++dj) {
      for (std::size_t di = 0; di < side_; ++di) {
        fn(domain_.flat(origin_[0] + di, domain_.dim() == 2 ? origin_[1] + dj : 0));
      }
    }
  }

 private:
  Domain domain_;
  std::array<std::size_t, 2> origin_;
  std::size_t side_;
};

/// Real samples at the cell centres of a Domain.
class GridFunction {
 public:
  explicit GridFunction(const Domain& domain, double value = 0.0);
  GridFunction(const Domain& domain, std::vector<double> values);

  static GridFunction sample(const Domain& domain, const std::function<double(const Point&)>& fn);
  /// Indicator of a cube.
  static GridFunction indicator(const CubeRegion& q);

  const Domain& domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  /// Pointwise image under `fn`.
  GridFunction map(const std::function<double(double)>& fn) const;
  GridFunction abs() const;
  GridFunction pow(double e) const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(const GridFunction& o);
  GridFunction& operator/=(const GridFunction& o);
  GridFunction& operator+=(double c);
  GridFunction& operator*=(double c);

  double max_abs() const;
  double min() const;
  double max() const;
  bool all_finite() const;
  bool all_positive() const;

 private:
  Domain domain_;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(GridFunction a, const GridFunction& b);
GridFunction operator/(GridFunction a, const GridFunction& b);
GridFunction operator*(double c, GridFunction a);
GridFunction operator+(GridFunction a, double c);

void require_same_domain(const GridFunction& a, const GridFunction& b);
/// Throws unless `w` is strictly positive and finite everywhere.
void require_weight(const GridFunction& w, const char* what);

double cube_average(const GridFunction& f, const CubeRegion& q);
/// Integral over the cube, Σ f h^dim.
double cube_integral(const GridFunction& f, const CubeRegion& q);
double integral(const GridFunction& f);
/// Linear (bilinear in 2D) interpolation between cell centres, constant beyond the outer centres.
double interpolate(const GridFunction& f, const Point& x);
/// (Σ |f|^p w h^dim)^{1/p}.
double lp_norm(const GridFunction& f, const GridFunction& w, double p);
double lp_norm(const GridFunction& f, double p);
/// sup_t t · w({|f| > t})^{1/q}, the supremum approached from below each sample level.
double weak_lq_norm(const GridFunction& f, const GridFunction& w, double q);

// CSV: header `index,x[,y],value`, one row per cell.
void write_csv(std::ostream& os, const GridFunction& f);
/// Infers N and L from the rows.
GridFunction read_csv(std::istream& is, int dim);
// Binary: int32 dim, int32 N, float64 L, then N^dim float64 values, little-endian.
void write_binary(std::ostream& os, const GridFunction& f);
GridFunction read_binary(std::istream& is);
/// Loads `.bin` as binary, anything else as CSV; the result must live on `domain`.
GridFunction load_grid_function(const std::string& path, const Domain& domain);

}  // namespace fracbump
