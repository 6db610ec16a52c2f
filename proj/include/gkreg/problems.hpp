#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "gkreg/operator.hpp"

namespace gkreg {

// Quadrature discretizations of classic first-kind Fredholm test kernels.
// All return a square n x n dense matrix together with the exact solution
// sampled on the quadrature grid and the consistent right-hand side
// b_true = A x_true. Names: shaw, baart, gravity, deriv2, heat.
// shaw and heat require even n; every generator requires n >= 8.
struct GeneratedProblem {
  std::shared_ptr<const DenseOperator> a;
  Vec b_true;
  Vec x_true;
};

GeneratedProblem generate(std::string_view name, std::size_t n);

// Separable 2-D Gaussian blur A = T (x) T on side x side images, T the
// normalized truncated-Gaussian Toeplitz band matrix (half-bandwidth `band`,
// width sigma). band = 0 degenerates to the identity. The exact image is a
// rectangle of intensity 1 plus a disk of intensity 0.5 on a zero background,
// vectorized column-major.
struct GeneratedBlur {
  std::shared_ptr<const KronProductOperator> a;
  Vec b_true;
  Vec x_true;
};

GeneratedBlur generate_blur2d(std::size_t side, std::size_t band, double sigma);

// b = b_true + epsilon ||b_true|| e / ||e||, e standard normal drawn from
// mt19937_64(seed) through a fixed Box-Muller transform, so b is bitwise
// reproducible across platforms. epsilon = 0 returns b_true unchanged.
Vec add_noise(std::span<const double> b_true, double epsilon, std::uint64_t seed);

// || L (x_reg - x_true) || / || L x_true ||. Throws when the denominator
// vanishes (x_true in the null space of L).
double relative_error(const LinearOperator& l, std::span<const double> x_reg,
                      std::span<const double> x_true);

enum class RegChoice { identity, d1, d2d_kron };

struct BlurParams {
  std::size_t band = 3;
  double sigma = 0.7;
};

struct ProblemInstance {
  std::shared_ptr<const LinearOperator> a;
  Vec b_true;
  Vec b;
  Vec x_true;  // empty when unknown (file import without exact solution)
  std::shared_ptr<const LinearOperator> l;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::string name;

  bool has_x_true() const { return !x_true.empty(); }
};

// Full assembly: generator (or blur), noise, and the chosen regularization
// operator. "blur" interprets n as the image side.
ProblemInstance make_problem(std::string_view name, std::size_t n, double epsilon,
                             std::uint64_t seed, RegChoice reg, BlurParams blur = {});

// Plain-text import/export. Matrices: header "gkmat <rows> <cols>" followed
// by rows*cols values row-major; vectors: "gkvec <n>" and n values. Values
// round-trip exactly (%.17g).
void save_matrix(const std::filesystem::path& path, const DenseMatrix& a);
DenseMatrix load_matrix(const std::filesystem::path& path);
void save_vector(const std::filesystem::path& path, std::span<const double> v);
Vec load_vector(const std::filesystem::path& path);

// Reads A.txt and x_true.txt and/or b_true.txt from dir, then applies noise
// and the regularization choice as make_problem does.
ProblemInstance make_problem_from_files(const std::filesystem::path& dir, double epsilon,
                                        std::uint64_t seed, RegChoice reg);

RegChoice reg_choice_from_string(std::string_view s);
std::string_view to_string(RegChoice reg);

}  // namespace gkreg
