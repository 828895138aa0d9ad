#include "handpose/calib.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "handpose/error.hpp"
#include "handpose/textfmt.hpp"

namespace handpose {

Keypoint project_point(const Eigen::Vector3d& p3d, const Intrinsics& intr,
                       const Extrinsics& extr) {
  if (!(intr.fx > 0.0) || !(intr.fy > 0.0)) {
    throw InvalidInputError("project_point: focal lengths must be positive");
  }
  const Eigen::Vector3d cam = extr.rotation * p3d + extr.translation;
  if (!(cam.z() > 0.0)) throw InvalidInputError("project_point: point behind the camera");
  return {intr.fx * cam.x() / cam.z() + intr.cx, intr.fy * cam.y() / cam.z() + intr.cy};
}

JointSet project_joint_set(const std::vector<Eigen::Vector3d>& joints3d, const Intrinsics& intr,
                           const Extrinsics& extr) {
  JointSet joints;
  joints.reserve(joints3d.size());
  for (std::size_t i = 0; i < joints3d.size(); ++i) {
    try {
      joints.push_back(project_point(joints3d[i], intr, extr));
    } catch (const InvalidInputError&) {
      throw InvalidInputError("project_joint_set: joint " + std::to_string(i) +
                              " behind the camera");
    }
  }
  return joints;
}

namespace {

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Vector3d flip(1.0, 1.0, -1.0);
    r = svd.matrixU() * flip.asDiagonal() * svd.matrixV().transpose();
  }
  return r;
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  if (theta < 1e-14) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// Sum of squared pixel residuals; infinite when a point leaves the frustum.
double objective(const std::vector<Correspondence>& corrs, const Intrinsics& intr,
                 const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  double sum = 0.0;
  for (const Correspondence& c : corrs) {
    const Eigen::Vector3d cam = r * c.p3d + t;
    if (!(cam.z() > 0.0)) return std::numeric_limits<double>::infinity();
    const double du = intr.fx * cam.x() / cam.z() + intr.cx - c.p2d.x;
    const double dv = intr.fy * cam.y() / cam.z() + intr.cy - c.p2d.y;
    sum += du * du + dv * dv;
  }
  return sum;
}

// Linear pose estimate on normalized image coordinates. Rank deficiency
// (collinear or coplanar points) shows up as a second near-zero singular
// value of the 2n x 12 system.
void dlt_initialize(const std::vector<Correspondence>& corrs, const Intrinsics& intr,
                    Eigen::Matrix3d& r, Eigen::Vector3d& t) {
  const std::size_t n = corrs.size();
  Eigen::MatrixXd a(2 * n, 12);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d& p = corrs[i].p3d;
    const double x = (corrs[i].p2d.x - intr.cx) / intr.fx;
    const double y = (corrs[i].p2d.y - intr.cy) / intr.fy;
    a.row(2 * i) << p.x(), p.y(), p.z(), 1.0, 0.0, 0.0, 0.0, 0.0, -x * p.x(), -x * p.y(),
        -x * p.z(), -x;
    a.row(2 * i + 1) << 0.0, 0.0, 0.0, 0.0, p.x(), p.y(), p.z(), 1.0, -y * p.x(), -y * p.y(),
        -y * p.z(), -y;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (!(sigma(0) > 0.0) || sigma(10) <= 1e-9 * sigma(0)) {
    throw DegenerateInputError("solve_pnp: rank-deficient correspondence configuration");
  }

  const Eigen::VectorXd m = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> proj;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 4; ++col) proj(row, col) = m(4 * row + col);
  }

  const double scale = proj.block<1, 3>(2, 0).norm();
  if (!(scale > 0.0)) throw DegenerateInputError("solve_pnp: zero-scale projection estimate");
  proj /= scale;

  std::size_t in_front = 0;
  for (const Correspondence& c : corrs) {
    const double z = proj.row(2).head<3>().dot(c.p3d) + proj(2, 3);
    if (z > 0.0) ++in_front;
  }
  if (2 * in_front < n) proj = -proj;

  r = nearest_rotation(proj.leftCols<3>());
  t = proj.col(3);
}

}  // namespace

Extrinsics solve_pnp(const std::vector<Correspondence>& correspondences, const Intrinsics& intr) {
  if (!(intr.fx > 0.0) || !(intr.fy > 0.0)) {
    throw InvalidInputError("solve_pnp: focal lengths must be positive");
  }
  if (correspondences.size() < 6) {
    throw InvalidInputError("solve_pnp: at least 6 correspondences required");
  }

  Eigen::Matrix3d r;
  Eigen::Vector3d t;
  dlt_initialize(correspondences, intr, r, t);

  double err = objective(correspondences, intr, r, t);
  if (!std::isfinite(err)) {
    throw NonConvergenceError("solve_pnp: initial estimate places points behind the camera");
  }

  const std::size_t n = correspondences.size();
  Eigen::MatrixXd jac(2 * n, 6);
  Eigen::VectorXd residual(2 * n);
  bool converged = false;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const Correspondence& c = correspondences[i];
      const Eigen::Vector3d cam = r * c.p3d + t;
      const double inv_z = 1.0 / cam.z();
      residual(2 * i) = c.p2d.x - (intr.fx * cam.x() * inv_z + intr.cx);
      residual(2 * i + 1) = c.p2d.y - (intr.fy * cam.y() * inv_z + intr.cy);

      Eigen::Matrix<double, 2, 3> d_pix;
      d_pix << intr.fx * inv_z, 0.0, -intr.fx * cam.x() * inv_z * inv_z, 0.0, intr.fy * inv_z,
          -intr.fy * cam.y() * inv_z * inv_z;
      // Left-multiplicative rotation increment: d(cam)/d(omega) = -[R p]_x.
      jac.block<2, 3>(2 * i, 0) = d_pix * (-skew(r * c.p3d));
      jac.block<2, 3>(2 * i, 3) = d_pix;
    }

    const Eigen::Matrix<double, 6, 1> delta = jac.colPivHouseholderQr().solve(residual);
    if (!delta.allFinite()) {
      throw NonConvergenceError("solve_pnp: non-finite refinement step at iteration " +
                                std::to_string(iter));
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving) {
      const Eigen::Matrix3d r_try = rodrigues(alpha * delta.head<3>()) * r;
      const Eigen::Vector3d t_try = t + alpha * delta.tail<3>();
      const double err_try = objective(correspondences, intr, r_try, t_try);
      if (std::isfinite(err_try) && err_try < err) {
        const double improvement = err - err_try;
        r = r_try;
        t = t_try;
        err = err_try;
        accepted = true;
        if (improvement < 1e-12) converged = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no descent direction left; local minimum
  }

  Extrinsics extr;
  extr.rotation = nearest_rotation(r);  // removes accumulated drift
  extr.translation = t;
  return extr;
}

double rms_reprojection_error(const std::vector<Correspondence>& correspondences,
                              const Intrinsics& intr, const Extrinsics& extr) {
  if (correspondences.empty()) {
    throw InvalidInputError("rms_reprojection_error: no correspondences");
  }
  double sum = 0.0;
  for (const Correspondence& c : correspondences) {
    const Keypoint p = project_point(c.p3d, intr, extr);
    const double du = p.x - c.p2d.x;
    const double dv = p.y - c.p2d.y;
    sum += du * du + dv * dv;
  }
  return std::sqrt(sum / static_cast<double>(correspondences.size()));
}

std::vector<std::pair<std::size_t, std::size_t>> synchronize_streams(
    const std::vector<TimedSample>& a, const std::vector<TimedSample>& b, double tolerance_ms) {
  if (tolerance_ms < 0.0) throw InvalidInputError("synchronize_streams: negative tolerance");
  auto check_sorted = [](const std::vector<TimedSample>& stream, const char* name) {
    for (std::size_t i = 1; i < stream.size(); ++i) {
      if (stream[i].timestamp_ms < stream[i - 1].timestamp_ms) {
        throw InvalidInputError(std::string("synchronize_streams: stream ") + name +
                                " is not sorted by timestamp");
      }
    }
  };
  check_sorted(a, "a");
  check_sorted(b, "b");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size() && j < b.size(); ++i) {
    // Walk forward while the next candidate is strictly closer; skipped
    // samples are dropped, which keeps the pairing monotone.
    while (j + 1 < b.size() && std::abs(b[j + 1].timestamp_ms - a[i].timestamp_ms) <
                                   std::abs(b[j].timestamp_ms - a[i].timestamp_ms)) {
      ++j;
    }
    if (std::abs(b[j].timestamp_ms - a[i].timestamp_ms) <= tolerance_ms) {
      pairs.emplace_back(i, j);
      ++j;
    }
  }
  return pairs;
}

namespace {

// Strips #-comments and surrounding whitespace; empty means skip the line.
std::string clean_line(const std::string& raw) {
  std::string line = raw;
  const std::size_t hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  const std::size_t first = line.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const std::size_t last = line.find_last_not_of(" \t\r\n");
  return line.substr(first, last - first + 1);
}

std::vector<double> parse_numbers(const std::string& line, std::size_t line_no) {
  std::vector<double> numbers;
  std::istringstream ss(line);
  std::string token;
  while (ss >> token) {
    double value = 0.0;
    if (!parse_double(token, value)) {
      throw ParseError("expected a number, got '" + token + "'", line_no);
    }
    numbers.push_back(value);
  }
  return numbers;
}

std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open: " + path);
  return in;
}

}  // namespace

std::vector<Correspondence> load_correspondences(const std::string& path) {
  std::ifstream in = open_text(path);
  std::vector<Correspondence> corrs;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = clean_line(raw);
    if (line.empty()) continue;
    const std::vector<double> v = parse_numbers(line, line_no);
    if (v.size() != 5) {
      throw ParseError("correspondence needs 5 numbers (X Y Z u v), got " +
                           std::to_string(v.size()),
                       line_no);
    }
    corrs.push_back({Eigen::Vector3d(v[0], v[1], v[2]), Keypoint{v[3], v[4]}});
  }
  return corrs;
}

Intrinsics load_intrinsics(const std::string& path) {
  std::ifstream in = open_text(path);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = clean_line(raw);
    if (line.empty()) continue;
    const std::vector<double> v = parse_numbers(line, line_no);
    if (v.size() != 4) {
      throw ParseError("intrinsics need 4 numbers (fx fy cx cy), got " + std::to_string(v.size()),
                       line_no);
    }
    if (!(v[0] > 0.0) || !(v[1] > 0.0)) {
      throw ParseError("focal lengths must be positive", line_no);
    }
    return {v[0], v[1], v[2], v[3]};
  }
  throw FormatError("intrinsics file is empty: " + path);
}

Extrinsics load_extrinsics(const std::string& path) {
  std::ifstream in = open_text(path);
  std::vector<double> v;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = clean_line(raw);
    if (line.empty()) continue;
    for (double x : parse_numbers(line, line_no)) v.push_back(x);
  }
  if (v.size() != 12) {
    throw FormatError("extrinsics file needs 12 numbers (row-major R, then t), got " +
                      std::to_string(v.size()) + ": " + path);
  }
  Extrinsics extr;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) extr.rotation(row, col) = v[3 * row + col];
  }
  extr.translation = Eigen::Vector3d(v[9], v[10], v[11]);

  const double ortho =
      (extr.rotation.transpose() * extr.rotation - Eigen::Matrix3d::Identity()).norm();
  if (ortho > 1e-6 || extr.rotation.determinant() < 0.0) {
    throw FormatError("extrinsics file: not a proper rotation: " + path);
  }
  return extr;
}

void save_extrinsics(const Extrinsics& extr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for writing: " + path);
  for (int row = 0; row < 3; ++row) {
    out << format_double(extr.rotation(row, 0)) << ' ' << format_double(extr.rotation(row, 1))
        << ' ' << format_double(extr.rotation(row, 2)) << '\n';
  }
  out << format_double(extr.translation.x()) << ' ' << format_double(extr.translation.y()) << ' '
      << format_double(extr.translation.z()) << '\n';
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace handpose
