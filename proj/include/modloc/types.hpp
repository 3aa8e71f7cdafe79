#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace modloc {

using scalar_t = double;
using complex_t = std::complex<scalar_t>;
using index_t = Eigen::Index;

using cvec_t = Eigen::Matrix<complex_t, Eigen::Dynamic, 1>;
using cmat_t = Eigen::Matrix<complex_t, Eigen::Dynamic, Eigen::Dynamic>;
using rvec_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, 1>;
using rmat_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, Eigen::Dynamic>;
using ivec_t = Eigen::Matrix<index_t, Eigen::Dynamic, 1>;
using vec3_t = Eigen::Matrix<scalar_t, 3, 1>;
using mat3_t = Eigen::Matrix<scalar_t, 3, 3>;
using spmat_t = Eigen::SparseMatrix<scalar_t>;

inline constexpr scalar_t pi = 3.141592653589793238462643383279502884;

enum class errc {
  not_standard,
  invalid_modular_data,
  ambient_mismatch,
  off_cone,
  section_singular,
  off_grid,
  incompatible_step,
  no_pct,
  cutoff_too_aggressive,
  empty_family,
  not_edge_direction,
  generator_not_invariant,
  subspace_not_invariant,
  dimension_overflow,
  not_cyclic_separating,
  support_violation,
  config_invalid,
  io_error,
  check_failed,
  replay_mismatch,
};

const char* errc_name(errc code);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

// Tolerances: absolute comparisons scale with ambient dimension, rank
// decisions with the largest singular value of the matrix at hand.
struct tolerance_policy {
  scalar_t abs_tol_per_dim = 1e-10;
  scalar_t rank_tol_rel = 1e-8;
  scalar_t abs_tol(index_t ambient_dim) const {
    return abs_tol_per_dim * static_cast<scalar_t>(ambient_dim);
  }
  scalar_t rank_tol(scalar_t sigma_max) const { return rank_tol_rel * sigma_max; }
};

// Inner products are conjugate-linear in the FIRST argument throughout,
// matching Eigen's x.dot(y) = x^* y.
inline complex_t inner(const cvec_t& x, const cvec_t& y) { return x.dot(y); }
inline scalar_t re_inner(const cvec_t& x, const cvec_t& y) { return x.dot(y).real(); }
inline scalar_t im_inner(const cvec_t& x, const cvec_t& y) { return x.dot(y).imag(); }

}  // namespace modloc
