#include "overlapmesh/quadrature.hpp"

#include "overlapmesh/errors.hpp"

#include <cmath>
#include <string>

namespace olm {

std::vector<MultiIndex> multi_indices(int degree) {
  std::vector<MultiIndex> out;
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b) out.push_back({a, b, d - a - b});
  return out;
}

double MomentSet::at(const MultiIndex& a) const {
  const auto it = values.find(a);
  if (it == values.end()) throw InvalidArgument("MomentSet: moment not available");
  return it->second;
}

Vec3 MomentSet::centroid() const {
  const double v = volume();
  return Vec3(at({1, 0, 0}), at({0, 1, 0}), at({0, 0, 1})) / v;
}

namespace {

constexpr int max_factorial = 16;

constexpr auto factorial_table = [] {
  std::array<double, max_factorial + 1> t{};
  t[0] = 1.0;
  for (int i = 1; i <= max_factorial; ++i) t[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i - 1)] * i;
  return t;
}();

constexpr double factorial(int n) { return factorial_table[static_cast<std::size_t>(n)]; }

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

constexpr int max_power = 8;

using PowerTable = std::array<double, max_power + 1>;

PowerTable powers(double x) {
  PowerTable t{};
  t[0] = 1.0;
  for (int i = 1; i <= max_power; ++i) t[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i - 1)] * x;
  return t;
}

// int_0^1 (x0 (1-t) + x1 t)^m (y0 (1-t) + y1 t)^n dt, expanded in the
// Bernstein basis so that every term is a product of the end values.
double edge_polynomial_integral(const PowerTable& x0, const PowerTable& x1, const PowerTable& y0,
                                const PowerTable& y1, int m, int n) {
  double sum = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double xs = binomial(m, i) * x0[static_cast<std::size_t>(m - i)] * x1[static_cast<std::size_t>(i)];
    for (int j = 0; j <= n; ++j) {
      const double ys = binomial(n, j) * y0[static_cast<std::size_t>(n - j)] * y1[static_cast<std::size_t>(j)];
      const int k = i + j;
      sum += xs * ys * factorial(m + n - k) * factorial(k);
    }
  }
  return sum / factorial(m + n + 1);
}

// Integrals of monomials of a planar face, via projection onto the
// (X, Y) = ((Z+1)%3, (Z+2)%3) coordinate plane and Green's theorem.
class FaceIntegrator {
public:
  FaceIntegrator(const PlanarPolygon& face, int max_order, int z_axis) : max_order_(max_order) {
    Vec3 n = face.normal;
    if (!(n.norm() > 0.5)) n = polygon_vector_area(face.vertices).normalized();
    else n.normalize();
    if (z_axis < 0) n.cwiseAbs().maxCoeff(&z_axis);
    z_ = z_axis;
    x_ = (z_ + 1) % 3;
    y_ = (z_ + 2) % 3;
    nz_ = n[z_];
    if (!(std::abs(nz_) > 1e-12))
      throw DegenerateGeometry("face_monomial_integral: projection axis orthogonal to face normal");
    double w = 0.0;
    for (const Vec3& v : face.vertices) w += n.dot(v);
    w /= static_cast<double>(face.vertices.size());
    w0_ = w / nz_;
    wx_ = -n[x_] / nz_;
    wy_ = -n[y_] / nz_;

    if (max_order_ + 1 > max_power) throw InvalidArgument("face integral order too high");
    const int size = max_order_ + 1;
    proj_.fill(0.0);
    const std::size_t nv = face.vertices.size();
    for (std::size_t e = 0; e < nv; ++e) {
      const Vec3& a = face.vertices[e];
      const Vec3& b = face.vertices[(e + 1) % nv];
      const double dy = b[y_] - a[y_];
      if (dy == 0.0) continue;
      const PowerTable xa = powers(a[x_]), xb = powers(b[x_]), ya = powers(a[y_]), yb = powers(b[y_]);
      for (int p = 0; p <= max_order_; ++p)
        for (int q = 0; p + q <= max_order_; ++q)
          proj_[static_cast<std::size_t>(p * size + q)] +=
              dy / (p + 1) * edge_polynomial_integral(xa, xb, ya, yb, p + 1, q);
    }
  }

  double integral(const MultiIndex& beta) const {
    const int k = beta[static_cast<std::size_t>(z_)];
    const int bx = beta[static_cast<std::size_t>(x_)];
    const int by = beta[static_cast<std::size_t>(y_)];
    if (bx + by + k > max_order_) throw InvalidArgument("face integral order exceeds prepared order");
    const int size = max_order_ + 1;
    const PowerTable w0 = powers(w0_), wx = powers(wx_), wy = powers(wy_);
    double sum = 0.0;
    // (w0 + wx X + wy Y)^k expanded as a multinomial.
    for (int a = 0; a <= k; ++a)
      for (int b = 0; a + b <= k; ++b) {
        const int c = k - a - b;
        const double coeff = factorial(k) / (factorial(a) * factorial(b) * factorial(c)) *
                             w0[static_cast<std::size_t>(a)] * wx[static_cast<std::size_t>(b)] *
                             wy[static_cast<std::size_t>(c)];
        if (coeff == 0.0) continue;
        sum += coeff * proj_[static_cast<std::size_t>((bx + b) * size + (by + c))];
      }
    return sum / nz_;
  }

private:
  int max_order_;
  int x_ = 0, y_ = 1, z_ = 2;
  double nz_ = 1.0, w0_ = 0.0, wx_ = 0.0, wy_ = 0.0;
  std::array<double, (max_power + 1) * (max_power + 1)> proj_;
};

}  // namespace

double face_monomial_integral(const PlanarPolygon& face, const MultiIndex& beta, int z_axis) {
  if (face.empty()) return 0.0;
  if (z_axis < -1 || z_axis > 2) throw InvalidArgument("face_monomial_integral: bad axis");
  return FaceIntegrator(face, order(beta), z_axis).integral(beta);
}

MomentSet polyhedron_moments(const ConvexPolyhedron& poly, int degree) {
  if (degree < 0 || degree > max_moment_degree)
    throw InvalidArgument("polyhedron_moments: degree must be in [0, " +
                          std::to_string(max_moment_degree) + "]");
  MomentSet m;
  m.degree = degree;
  const auto alphas = multi_indices(degree);
  std::vector<double> acc(alphas.size(), 0.0);
  for (const auto& face : poly.faces) {
    if (face.empty()) continue;
    const FaceIntegrator fi(face, degree + 1, -1);
    Vec3 n = face.normal;
    if (!(n.norm() > 0.5)) n = polygon_vector_area(face.vertices).normalized();
    else n.normalize();
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      const MultiIndex& a = alphas[j];
      double s = 0.0;
      for (int i = 0; i < 3; ++i) {
        if (n[i] == 0.0) continue;
        MultiIndex b = a;
        ++b[static_cast<std::size_t>(i)];
        s += n[i] * fi.integral(b) / (3.0 * (a[static_cast<std::size_t>(i)] + 1));
      }
      acc[j] += s;
    }
  }
  for (std::size_t j = 0; j < alphas.size(); ++j) m.values.emplace_hint(m.values.end(), alphas[j], acc[j]);
  return m;
}

FirstMoments polyhedron_first_moments(const ConvexPolyhedron& poly) {
  FirstMoments m;
  if (poly.empty()) return m;
  const Vec3 apex = poly.faces.front().vertices.front();
  for (const auto& face : poly.faces) {
    const auto& v = face.vertices;
    if (v.size() < 3) continue;
    const double sign = polygon_vector_area(v).dot(face.normal) < 0.0 ? -1.0 : 1.0;
    const Vec3 a = v[0] - apex;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      const Vec3 b = v[i] - apex, c = v[i + 1] - apex;
      const double vol = sign * a.dot(b.cross(c)) / 6.0;
      m.volume += vol;
      m.first += vol * (a + b + c) / 4.0;
    }
  }
  m.first += m.volume * apex;
  return m;
}

double QuadratureRule::measure() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double QuadratureRule::integrate(const std::function<double(const Vec3&)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i]);
  return s;
}

QuadratureRule barycenter_rule(double volume, const Vec3& centroid) {
  if (!(volume > 0)) throw InvalidArgument("barycenter_rule: volume must be positive");
  return {{centroid}, {volume}, 1};
}

PolygonMeasure polygon_area_centroid(const PlanarPolygon& polygon) {
  PolygonMeasure out;
  if (polygon.empty()) return out;
  Aabb box;
  for (const Vec3& p : polygon.vertices) box.expand(p);
  const double diam = box.diameter();
  const FaceIntegrator fi(polygon, 1, -1);
  const double area = fi.integral({0, 0, 0});
  if (!(area >= eps_geom * diam * diam)) return out;
  out.area = area;
  out.centroid = Vec3(fi.integral({1, 0, 0}), fi.integral({0, 1, 0}), fi.integral({0, 0, 1})) / area;
  out.rule = {{out.centroid}, {area}, 1};
  return out;
}

QuadratureRule tet_rule(int exact_degree) {
  QuadratureRule r;
  auto add_s31 = [&r](double a, double w) {
    const double c = 1.0 - 3.0 * a;
    r.points.emplace_back(a, a, a);
    r.points.emplace_back(c, a, a);
    r.points.emplace_back(a, c, a);
    r.points.emplace_back(a, a, c);
    r.weights.insert(r.weights.end(), 4, w);
  };
  switch (exact_degree) {
    case 1:
      r.points = {Vec3::Constant(0.25)};
      r.weights = {1.0 / 6.0};
      r.exact_degree = 1;
      return r;
    case 2:
      add_s31(0.1381966011250105151795, 1.0 / 24.0);
      r.exact_degree = 2;
      return r;
    case 4: {
      // Symmetric 14-point rule, exact through degree 5.
      add_s31(0.09273525031089169228, 0.012248840519393792485);
      add_s31(0.31088591926330076754, 0.018781320953002933008);
      const double b = 0.045503704125647604647, c = 0.5 - b;
      const double w = 0.0070910034628466274492;
      r.points.emplace_back(b, b, c);
      r.points.emplace_back(b, c, b);
      r.points.emplace_back(c, b, b);
      r.points.emplace_back(b, c, c);
      r.points.emplace_back(c, b, c);
      r.points.emplace_back(c, c, b);
      r.weights.insert(r.weights.end(), 6, w);
      r.exact_degree = 4;
      return r;
    }
    default:
      throw InvalidArgument("tet_rule: supported degrees are 1, 2 and 4");
  }
}

QuadratureRule map_to_tet(const QuadratureRule& reference, const TetPoints& tet) {
  Mat3 j;
  j.col(0) = tet[1] - tet[0];
  j.col(1) = tet[2] - tet[0];
  j.col(2) = tet[3] - tet[0];
  const double det = std::abs(j.determinant());
  QuadratureRule r;
  r.exact_degree = reference.exact_degree;
  r.points.reserve(reference.size());
  r.weights.reserve(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    r.points.push_back(tet[0] + j * reference.points[i]);
    r.weights.push_back(reference.weights[i] * det);
  }
  return r;
}

QuadratureRule triangle_rule(const TriPoints& tri) {
  const double area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm();
  QuadratureRule r;
  r.exact_degree = 2;
  for (int i = 0; i < 3; ++i) {
    r.points.push_back((2.0 / 3.0) * tri[static_cast<std::size_t>(i)] +
                       (1.0 / 6.0) * (tri[static_cast<std::size_t>((i + 1) % 3)] +
                                      tri[static_cast<std::size_t>((i + 2) % 3)]));
    r.weights.push_back(area / 3.0);
  }
  return r;
}

double moment_integrate(const std::map<MultiIndex, double>& coeffs, const MomentSet& moments) {
  double s = 0.0;
  for (const auto& [a, c] : coeffs) {
    const auto it = moments.values.find(a);
    if (it == moments.values.end())
      throw InvalidArgument("moment_integrate: moment of order " + std::to_string(order(a)) +
                            " not available");
    s += c * it->second;
  }
  return s;
}

const QuadratureRule& QuadratureCache::get_or_compute(Index key,
                                                      const std::function<QuadratureRule()>& compute) {
  if (const auto it = rules_.find(key); it != rules_.end()) return it->second;
  if (frozen_) throw InternalConsistency("QuadratureCache: insertion after freeze");
  return rules_.emplace(key, compute()).first->second;
}

const QuadratureRule* QuadratureCache::find(Index key) const {
  const auto it = rules_.find(key);
  return it == rules_.end() ? nullptr : &it->second;
}

}  // namespace olm
