#include "gkreg/problems.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gkreg {

namespace {

constexpr double pi = std::numbers::pi;

DenseMatrix shaw_matrix(std::size_t n, Vec& x_true) {
  const double h = pi / static_cast<double>(n);
  Vec a(n), ca(n), sa(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = -pi / 2.0 + (static_cast<double>(i) + 0.5) * h;
    ca[i] = std::cos(a[i]);
    sa[i] = std::sin(a[i]);
  }
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double u = pi * (sa[i] + sa[j]);
      const double sinc = u == 0.0 ? 1.0 : std::sin(u) / u;
      const double t = (ca[i] + ca[j]) * sinc;
      m(i, j) = h * t * t;
    }
  }
  x_true.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    x_true[i] = 2.0 * std::exp(-6.0 * (a[i] - 0.8) * (a[i] - 0.8)) +
                std::exp(-2.0 * (a[i] + 0.5) * (a[i] + 0.5));
  return m;
}

DenseMatrix baart_matrix(std::size_t n, Vec& x_true) {
  const double hs = (pi / 2.0) / static_cast<double>(n);
  const double ht = pi / static_cast<double>(n);
  DenseMatrix m(n, n);
  x_true.resize(n);
  for (std::size_t j = 0; j < n; ++j) x_true[j] = std::sin((static_cast<double>(j) + 0.5) * ht);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * hs;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = (static_cast<double>(j) + 0.5) * ht;
      m(i, j) = ht * std::exp(s * std::cos(t));
    }
  }
  return m;
}

DenseMatrix gravity_matrix(std::size_t n, Vec& x_true) {
  const double d = 0.25;
  const double h = 1.0 / static_cast<double>(n);
  DenseMatrix m(n, n);
  x_true.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * h;
    x_true[i] = std::sin(pi * s) + 0.5 * std::sin(2.0 * pi * s);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = (static_cast<double>(j) + 0.5) * h;
      const double r2 = d * d + (s - t) * (s - t);
      m(i, j) = h * d / (r2 * std::sqrt(r2));
    }
  }
  return m;
}

DenseMatrix deriv2_matrix(std::size_t n, Vec& x_true) {
  const double h = 1.0 / static_cast<double>(n);
  DenseMatrix m(n, n);
  x_true.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * h;
    x_true[i] = s;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = (static_cast<double>(j) + 0.5) * h;
      // Green's function of the second derivative with zero endpoints.
      m(i, j) = h * (s < t ? s * (t - 1.0) : t * (s - 1.0));
    }
  }
  return m;
}

DenseMatrix heat_matrix(std::size_t n, Vec& x_true) {
  const double h = 1.0 / static_cast<double>(n);
  const double c = h / (2.0 * std::sqrt(pi));
  Vec kern(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double t = (static_cast<double>(l) + 0.5) * h;
    kern[l] = c * std::pow(t, -1.5) * std::exp(-0.25 / t);
  }
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = kern[i - j];
  x_true.assign(n, 0.0);
  for (std::size_t i = 1; i <= n / 2; ++i) {
    const double ti = static_cast<double>(i) * 20.0 / static_cast<double>(n);
    double v;
    if (ti < 2.0)
      v = 0.75 * ti * ti / 4.0;
    else if (ti < 3.0)
      v = 0.75 + (ti - 2.0) * (3.0 - ti);
    else
      v = 0.75 * std::exp(-(ti - 3.0) * 2.0);
    x_true[i - 1] = v;
  }
  return m;
}

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa draw; avoids the implementation-defined distribution
  // adaptors so streams are identical across standard libraries.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

GeneratedProblem generate(std::string_view name, std::size_t n) {
  if (n < 8) throw std::invalid_argument("generate: n must be >= 8");
  Vec x_true;
  DenseMatrix m;
  if (name == "shaw" || name == "heat") {
    if (n % 2 != 0) throw std::invalid_argument("generate: shaw and heat require even n");
    m = name == "shaw" ? shaw_matrix(n, x_true) : heat_matrix(n, x_true);
  } else if (name == "baart") {
    m = baart_matrix(n, x_true);
  } else if (name == "gravity") {
    m = gravity_matrix(n, x_true);
  } else if (name == "deriv2") {
    m = deriv2_matrix(n, x_true);
  } else {
    throw std::invalid_argument("generate: unknown problem '" + std::string(name) + "'");
  }
  GeneratedProblem out;
  out.a = dense_operator(std::move(m));
  out.x_true = std::move(x_true);
  out.b_true = out.a->apply(out.x_true);
  return out;
}

GeneratedBlur generate_blur2d(std::size_t side, std::size_t band, double sigma) {
  if (side < 4) throw std::invalid_argument("generate_blur2d: side must be >= 4");
  if (band >= side) throw std::invalid_argument("generate_blur2d: band must be < side");
  if (sigma <= 0.0) throw std::invalid_argument("generate_blur2d: sigma must be positive");

  Vec w(band + 1);
  double wsum = 0.0;
  for (std::size_t l = 0; l <= band; ++l) {
    w[l] = std::exp(-static_cast<double>(l * l) / (2.0 * sigma * sigma));
    wsum += (l == 0 ? 1.0 : 2.0) * w[l];
  }
  std::vector<SparseBandedMatrix::RowEntries> rows(side);
  for (std::size_t i = 0; i < side; ++i) {
    const std::size_t lo = i >= band ? i - band : 0;
    const std::size_t hi = std::min(side - 1, i + band);
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t d = i >= j ? i - j : j - i;
      rows[i].push_back({j, w[d] / wsum});
    }
  }
  SparseBandedMatrix t(side, side, std::move(rows));

  GeneratedBlur out;
  out.a = std::make_shared<const KronProductOperator>(std::move(t), side);
  out.x_true.assign(side * side, 0.0);
  const double inv = 1.0 / static_cast<double>(side);
  for (std::size_t j = 0; j < side; ++j) {
    const double v = (static_cast<double>(j) + 0.5) * inv;
    for (std::size_t i = 0; i < side; ++i) {
      const double u = (static_cast<double>(i) + 0.5) * inv;
      double val = 0.0;
      if (u >= 0.2 && u <= 0.5 && v >= 0.15 && v <= 0.45) val = 1.0;
      const double du = u - 0.65, dv = v - 0.7;
      if (du * du + dv * dv <= 0.18 * 0.18) val = 0.5;
      out.x_true[i + j * side] = val;
    }
  }
  out.b_true = out.a->apply(out.x_true);
  return out;
}

Vec add_noise(std::span<const double> b_true, double epsilon, std::uint64_t seed) {
  if (epsilon < 0.0) throw std::invalid_argument("add_noise: negative noise level");
  Vec b(b_true.begin(), b_true.end());
  if (epsilon == 0.0) return b;
  const double bnorm = kernels::nrm2(b_true);
  if (bnorm == 0.0) throw std::invalid_argument("add_noise: zero signal with positive noise");

  std::mt19937_64 rng(seed);
  Vec e(b.size());
  for (std::size_t i = 0; i < e.size(); i += 2) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    e[i] = r * std::cos(2.0 * pi * u2);
    if (i + 1 < e.size()) e[i + 1] = r * std::sin(2.0 * pi * u2);
  }
  const double enorm = kernels::nrm2(e);
  kernels::axpy(epsilon * bnorm / enorm, e, b);
  return b;
}

double relative_error(const LinearOperator& l, std::span<const double> x_reg,
                      std::span<const double> x_true) {
  if (x_reg.size() != l.cols() || x_true.size() != l.cols())
    throw std::invalid_argument("relative_error: dimension mismatch");
  Vec lxt = l.apply(x_true);
  const double denom = kernels::nrm2(lxt);
  if (denom == 0.0) throw std::invalid_argument("relative_error: x_true in the null space of L");
  Vec diff(x_reg.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x_reg[i] - x_true[i];
  return kernels::nrm2(l.apply(diff)) / denom;
}

namespace {

std::shared_ptr<const LinearOperator> reg_operator(RegChoice reg, std::size_t n,
                                                   std::size_t side) {
  switch (reg) {
    case RegChoice::identity: return identity_operator(n);
    case RegChoice::d1: return first_derivative_operator(n);
    case RegChoice::d2d_kron:
      if (side == 0)
        throw std::invalid_argument("d2d-kron regularization requires a 2-D problem");
      return kron_stack_operator(side);
  }
  throw std::invalid_argument("unknown regularization choice");
}

}  // namespace

ProblemInstance make_problem(std::string_view name, std::size_t n, double epsilon,
                             std::uint64_t seed, RegChoice reg, BlurParams blur) {
  ProblemInstance p;
  p.name = name;
  p.epsilon = epsilon;
  p.seed = seed;
  if (name == "blur") {
    GeneratedBlur g = generate_blur2d(n, blur.band, blur.sigma);
    p.a = g.a;
    p.b_true = std::move(g.b_true);
    p.x_true = std::move(g.x_true);
    p.l = reg_operator(reg, n * n, n);
  } else {
    GeneratedProblem g = generate(name, n);
    p.a = g.a;
    p.b_true = std::move(g.b_true);
    p.x_true = std::move(g.x_true);
    p.l = reg_operator(reg, n, 0);
  }
  p.b = add_noise(p.b_true, epsilon, seed);
  return p;
}

namespace {

void write_values(std::FILE* f, std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    std::fprintf(f, "%.17g%c", v[i], (i + 1) % 4 == 0 || i + 1 == v.size() ? '\n' : ' ');
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::filesystem::path& path, const char* mode) {
  std::FILE* f = std::fopen(path.string().c_str(), mode);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return FilePtr(f);
}

}  // namespace

void save_matrix(const std::filesystem::path& path, const DenseMatrix& a) {
  FilePtr f = open_or_throw(path, "w");
  std::fprintf(f.get(), "gkmat %zu %zu\n", a.rows(), a.cols());
  write_values(f.get(), a.values());
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string tag;
  std::size_t rows = 0, cols = 0;
  in >> tag >> rows >> cols;
  if (!in || tag != "gkmat") throw std::runtime_error("bad matrix header in " + path.string());
  DenseMatrix a(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i)
    if (!(in >> a.data()[i])) throw std::runtime_error("truncated matrix in " + path.string());
  return a;
}

void save_vector(const std::filesystem::path& path, std::span<const double> v) {
  FilePtr f = open_or_throw(path, "w");
  std::fprintf(f.get(), "gkvec %zu\n", v.size());
  write_values(f.get(), v);
}

Vec load_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string tag;
  std::size_t n = 0;
  in >> tag >> n;
  if (!in || tag != "gkvec") throw std::runtime_error("bad vector header in " + path.string());
  Vec v(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(in >> v[i])) throw std::runtime_error("truncated vector in " + path.string());
  return v;
}

ProblemInstance make_problem_from_files(const std::filesystem::path& dir, double epsilon,
                                        std::uint64_t seed, RegChoice reg) {
  namespace fs = std::filesystem;
  ProblemInstance p;
  p.name = "import:" + dir.filename().string();
  p.epsilon = epsilon;
  p.seed = seed;
  DenseMatrix a = load_matrix(dir / "A.txt");
  const std::size_t n = a.cols();
  p.a = dense_operator(std::move(a));
  if (fs::exists(dir / "x_true.txt")) {
    p.x_true = load_vector(dir / "x_true.txt");
    if (p.x_true.size() != n) throw std::runtime_error("x_true.txt size mismatch");
  }
  if (fs::exists(dir / "b_true.txt")) {
    p.b_true = load_vector(dir / "b_true.txt");
    if (p.b_true.size() != p.a->rows()) throw std::runtime_error("b_true.txt size mismatch");
  } else if (!p.x_true.empty()) {
    p.b_true = p.a->apply(p.x_true);
  } else {
    throw std::runtime_error("import needs x_true.txt or b_true.txt in " + dir.string());
  }
  if (reg == RegChoice::d2d_kron)
    throw std::invalid_argument("d2d-kron regularization requires a 2-D problem");
  p.l = reg == RegChoice::identity ? identity_operator(n) : first_derivative_operator(n);
  p.b = add_noise(p.b_true, epsilon, seed);
  return p;
}

RegChoice reg_choice_from_string(std::string_view s) {
  if (s == "identity") return RegChoice::identity;
  if (s == "d1") return RegChoice::d1;
  if (s == "d2d-kron") return RegChoice::d2d_kron;
  throw std::invalid_argument("unknown regularization choice '" + std::string(s) + "'");
}

std::string_view to_string(RegChoice reg) {
  switch (reg) {
    case RegChoice::identity: return "identity";
    case RegChoice::d1: return "d1";
    case RegChoice::d2d_kron: return "d2d-kron";
  }
  return "unknown";
}

}  // namespace gkreg
