#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "elastolab/field.hpp"
#include "elastolab/phantom.hpp"
#include "elastolab/resample.hpp"

namespace elastolab {

using Complex = std::complex<double>;

/// Complex shear modulus mu* = mu * (1 + i*eta), Pa.
struct ComplexModulusField {
  Grid2<Complex> mu_star;

  static ComplexModulusField from_maps(const ScalarField& mu, const ScalarField& damping) {
    if (!mu.same_shape(damping)) throw std::invalid_argument("mu/damping shape mismatch");
    ComplexModulusField f;
    f.mu_star = Grid2<Complex>(mu.height, mu.width, mu.spacing_mm);
    for (std::size_t i = 0; i < mu.values.size(); ++i)
      f.mu_star.values[i] = Complex(mu.values[i], mu.values[i] * damping.values[i]);
    return f;
  }

  void validate() const {
    check_field(mu_star);
    for (const auto& v : mu_star.values) {
      if (v.real() < 1000.0) throw std::invalid_argument("Re(mu*) below 1000 Pa");
      const double eta = v.imag() / v.real();
      if (eta < 0.05 - 1e-12 || eta > 0.3 + 1e-12)
        throw std::invalid_argument("loss factor outside [0.05, 0.3]");
    }
  }
};

// Per-edge Dirichlet displacement (mm); zero means a fixed edge. A corner
// shared by two edges takes the value with the larger magnitude, so the
// excited edge wins over fixed neighbours.
struct BoundaryCondition {
  std::array<Complex, 4> edge_displacement_mm{};  // indexed by Edge

  static BoundaryCondition planar(Edge edge, Complex amplitude_mm) {
    BoundaryCondition bc;
    bc.edge_displacement_mm[static_cast<int>(edge)] = amplitude_mm;
    return bc;
  }

  Complex value_at(int r, int c, int height, int width) const {
    Complex best = 0.0;
    auto consider = [&](Edge e) {
      const Complex v = edge_displacement_mm[static_cast<int>(e)];
      if (std::abs(v) > std::abs(best)) best = v;
    };
    if (c == 0) consider(Edge::kLeft);
    if (r == 0) consider(Edge::kTop);
    if (c == width - 1) consider(Edge::kRight);
    if (r == height - 1) consider(Edge::kBottom);
    return best;
  }
};

// 5-point finite-difference system over the interior nodes, CSR layout with
// at most 5 nonzeros per row. Dirichlet boundary values are folded into rhs.
struct SparseSystem {
  int height = 0;
  int width = 0;
  double spacing_mm = 1.0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<Complex> vals;
  std::vector<Complex> rhs;
  std::vector<Complex> boundary;  // full-grid boundary values, interior entries zero

  int n() const { return (height - 2) * (width - 2); }
  int unknown_index(int r, int c) const { return (r - 1) * (width - 2) + (c - 1); }

  std::vector<Complex> apply(const std::vector<Complex>& x) const {
    std::vector<Complex> y(rhs.size(), 0.0);
    for (std::size_t row = 0; row < rhs.size(); ++row)
      for (int k = row_ptr[row]; k < row_ptr[row + 1]; ++k) y[row] += vals[k] * x[col_idx[k]];
    return y;
  }
};

// Discretizes div(mu* grad u) + rho w^2 u = 0 with harmonic-mean face
// coefficients mu_face = 2 mu_a mu_b / (mu_a + mu_b), which keeps the flux
// continuous across material interfaces.
inline SparseSystem assemble(const ComplexModulusField& modulus, double density_kg_m3,
                             double frequency_hz, const BoundaryCondition& bc) {
  const auto& grid = modulus.mu_star;
  if (grid.height < 16 || grid.width < 16)
    throw std::invalid_argument("solver grid must be at least 16x16");
  if (!(grid.spacing_mm > 0.0)) throw std::invalid_argument("spacing must be > 0");
  if (!(density_kg_m3 > 0.0) || !(frequency_hz > 0.0))
    throw std::invalid_argument("density and frequency must be > 0");

  const int height = grid.height;
  const int width = grid.width;
  const double h = grid.spacing_mm * 1e-3;  // meters
  const double inv_h2 = 1.0 / (h * h);
  const double omega = 2.0 * 3.14159265358979323846 * frequency_hz;
  const double rho_w2 = density_kg_m3 * omega * omega;

  SparseSystem sys;
  sys.height = height;
  sys.width = width;
  sys.spacing_mm = grid.spacing_mm;
  sys.boundary.assign(grid.size(), 0.0);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      if (r == 0 || c == 0 || r == height - 1 || c == width - 1)
        sys.boundary[static_cast<std::size_t>(r) * width + c] = bc.value_at(r, c, height, width);

  const int n = sys.n();
  sys.rhs.assign(n, 0.0);
  sys.row_ptr.reserve(n + 1);
  sys.row_ptr.push_back(0);
  sys.col_idx.reserve(static_cast<std::size_t>(n) * 5);
  sys.vals.reserve(static_cast<std::size_t>(n) * 5);

  auto face = [](Complex a, Complex b) { return 2.0 * a * b / (a + b); };

  for (int r = 1; r < height - 1; ++r) {
    for (int c = 1; c < width - 1; ++c) {
      const int row = sys.unknown_index(r, c);
      const Complex mu_c = grid.at(r, c);
      // Neighbours in ascending unknown-index order: N, W, center, E, S.
      const std::array<std::pair<int, int>, 4> nbrs = {
          std::pair{r - 1, c}, {r, c - 1}, {r, c + 1}, {r + 1, c}};
      Complex center = Complex(rho_w2, 0.0);
      std::array<Complex, 4> coeff;
      for (int k = 0; k < 4; ++k) {
        coeff[k] = face(mu_c, grid.at(nbrs[k].first, nbrs[k].second)) * inv_h2;
        if (!std::isfinite(coeff[k].real()) || !std::isfinite(coeff[k].imag()))
          throw std::runtime_error("non-finite stencil coefficient");
        center -= coeff[k];
      }
      auto emit = [&](int rr, int cc, Complex v) {
        if (rr == 0 || cc == 0 || rr == height - 1 || cc == width - 1) {
          sys.rhs[row] -= v * sys.boundary[static_cast<std::size_t>(rr) * width + cc];
        } else {
          sys.col_idx.push_back(sys.unknown_index(rr, cc));
          sys.vals.push_back(v);
        }
      };
      emit(r - 1, c, coeff[0]);
      emit(r, c - 1, coeff[1]);
      sys.col_idx.push_back(row);
      sys.vals.push_back(center);
      emit(r, c + 1, coeff[2]);
      emit(r + 1, c, coeff[3]);
      sys.row_ptr.push_back(static_cast<int>(sys.col_idx.size()));
    }
  }
  return sys;
}

struct SolveResult {
  ComplexField u;
  double relative_residual = 0.0;
};

/// Sparse direct solve; throws if the relative residual exceeds 1e-8.
inline SolveResult solve(const SparseSystem& sys, double residual_tol = 1e-8) {
  const int n = sys.n();
  if (n <= 0 || sys.row_ptr.size() != static_cast<std::size_t>(n) + 1)
    throw std::invalid_argument("system not assembled");

  Eigen::VectorXcd b(n);
  for (int i = 0; i < n; ++i) b[i] = sys.rhs[i];

  std::vector<Complex> x_raw(n, 0.0);
  const double b_norm = b.norm();
  if (b_norm > 0.0) {
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(sys.vals.size());
    for (int row = 0; row < n; ++row)
      for (int k = sys.row_ptr[row]; k < sys.row_ptr[row + 1]; ++k)
        trips.emplace_back(row, sys.col_idx[k], sys.vals[k]);
    Eigen::SparseMatrix<Complex> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());

    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw std::runtime_error("sparse factorization failed (singular system?)");
    Eigen::VectorXcd x = lu.solve(b);
    for (int i = 0; i < n; ++i) x_raw[i] = x[i];
  }
  // else: homogeneous system, zero solution.

  // Residual check against the CSR operator itself, not the factorization.
  double res_norm = 0.0;
  const std::vector<Complex> ax = sys.apply(x_raw);
  for (int i = 0; i < n; ++i) res_norm += std::norm(ax[i] - sys.rhs[i]);
  res_norm = std::sqrt(res_norm);
  const double rel = b_norm > 0.0 ? res_norm / b_norm : res_norm;
  if (rel > residual_tol) {
    throw std::runtime_error("solver residual " + std::to_string(rel) + " exceeds tolerance " +
                             std::to_string(residual_tol));
  }

  SolveResult result;
  result.relative_residual = rel;
  result.u = ComplexField(sys.height, sys.width, sys.spacing_mm);
  for (int r = 0; r < sys.height; ++r)
    for (int c = 0; c < sys.width; ++c)
      result.u.at(r, c) = (r == 0 || c == 0 || r == sys.height - 1 || c == sys.width - 1)
                              ? sys.boundary[static_cast<std::size_t>(r) * sys.width + c]
                              : x_raw[sys.unknown_index(r, c)];
  return result;
}

/// Full forward pipeline: render -> assemble -> solve -> resample to 1 mm.
inline std::pair<ComplexField, ScalarField> simulate(const PhantomSpec& spec, double frequency_hz,
                                                     double density_kg_m3,
                                                     double target_spacing_mm = 1.0) {
  auto [mu, damping] = render_stiffness(spec);
  const auto modulus = ComplexModulusField::from_maps(mu, damping);
  const auto bc = BoundaryCondition::planar(spec.excitation.edge, Complex(spec.excitation.amplitude_mm, 0.0));
  const SparseSystem sys = assemble(modulus, density_kg_m3, frequency_hz, bc);
  ComplexField u = solve(sys).u;
  if (u.spacing_mm != target_spacing_mm) {
    u = resample(u, target_spacing_mm);
    mu = resample(mu, target_spacing_mm);
  }
  return {std::move(u), std::move(mu)};
}

}  // namespace elastolab
