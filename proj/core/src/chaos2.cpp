#include "berry/chaos2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "berry/error.hpp"
#include "berry/nodal.hpp"
#include "berry/quadrature.hpp"

namespace berry {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kBlock = 256;

}  // namespace

int chaos_nodes(double energy, double len, int refine) {
  const double n = std::max(20.0, std::ceil(10.0 * std::sqrt(energy) * len));
  if (n * refine > 2e6) throw ResourceError("quadrature node count too large");
  return static_cast<int>(n) * std::max(1, refine);
}

double phi_normalization(double energy) { return 4.0 * kPi * std::pow(energy, 0.25); }

ChaosSample phi_boundary(const PlaneWaveField& field, const PolygonalChain& chain, int refine) {
  const double E = field.energy();
  ChaosSample out;
  double total = 0.0;
  std::vector<double> x;
  std::vector<double> w;
  for (const auto& seg : chain.segments()) {
    const int n = chaos_nodes(E, seg.length(), refine);
    quad::map_rule(quad::gauss_legendre(n), 0.0, seg.length(), x, w);
    const Vec2 nrm = seg.normal();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const FieldEval fe = field.eval(seg.at(x[i]));
      s += w[i] * fe.value * dot(fe.gradient, nrm);
    }
    total += s;
    out.nodes += n;
  }
  out.raw = total / (8.0 * kPi * std::sqrt(2.0 * E));
  out.factor = phi_normalization(E);
  out.normalized = out.factor * out.raw;
  return out;
}

double phi_tilde(const PlaneWaveField& field, const PolygonalChain& chain, int refine) {
  return phi_boundary(field, chain, refine).normalized;
}

double chaos2_domain_raw(const PlaneWaveField& field, const RectDomain& d, int refine) {
  if (d.degenerate()) return 0.0;
  const double E = field.energy();
  std::vector<double> xs;
  std::vector<double> wx;
  std::vector<double> ys;
  std::vector<double> wy;
  quad::map_rule(quad::gauss_legendre(chaos_nodes(E, d.width(), refine)), d.x0, d.x1, xs, wx);
  quad::map_rule(quad::gauss_legendre(chaos_nodes(E, d.height(), refine)), d.y0, d.y1, ys, wy);
  const PlaneWaveField::TensorEvaluator ev(field, xs);
  const Eigen::Map<const Eigen::VectorXd> wxv(wx.data(), static_cast<Eigen::Index>(wx.size()));
  const double grad_scale = 1.0 / (2.0 * kPi * kPi * E);
  double sum = 0.0;
  for (std::size_t j0 = 0; j0 < ys.size(); j0 += kBlock) {
    const std::size_t nb = std::min<std::size_t>(kBlock, ys.size() - j0);
    const std::span<const double> yb(ys.data() + j0, nb);
    const Eigen::MatrixXd v = ev(yb, PlaneWaveField::Component::value);
    const Eigen::MatrixXd gx = ev(yb, PlaneWaveField::Component::dx);
    const Eigen::MatrixXd gy = ev(yb, PlaneWaveField::Component::dy);
    const Eigen::MatrixXd integrand =
        -2.0 * v.array().square() + grad_scale * (gx.array().square() + gy.array().square());
    const Eigen::VectorXd col = integrand.transpose() * wxv;
    for (std::size_t j = 0; j < nb; ++j) sum += wy[j0 + j] * col[static_cast<Eigen::Index>(j)];
  }
  return kPi * std::sqrt(2.0 * E) / 8.0 * sum;
}

ChaosSample chaos2_domain(const PlaneWaveField& field, const RectDomain& d, int refine) {
  const double E = field.energy();
  if (!(E > std::numbers::e))
    throw NormalizationError("second-chaos normalization needs E > e");
  ChaosSample s;
  s.raw = chaos2_domain_raw(field, d, refine);
  s.factor = nodal_normalization(E);
  s.normalized = s.factor * s.raw;
  if (!d.degenerate())
    s.nodes = static_cast<long>(chaos_nodes(E, d.width(), refine)) *
              chaos_nodes(E, d.height(), refine);
  return s;
}

double rescaled_chaos2(const RectDomain& d, double R, std::uint64_t seed,
                       std::uint64_t replication, int n_waves, int refine) {
  if (!(R > 0.0)) throw ConfigError("rescaling factor R must be positive");
  const double e_canon = 1.0 / (4.0 * kPi * kPi);
  const double e_window = R * R * e_canon;
  const int m = n_waves > 0 ? n_waves : default_n_waves(e_window);
  const PlaneWaveField b = PlaneWaveField::sample(e_canon, m, seed, replication);
  return chaos2_domain_raw(b, d.scaled(R), refine) / R;
}

void write_chaos_csv_header(std::ostream& os) {
  os << "# schema_version=1\n";
  os << "rep,chain_id,raw,normalized\n";
}

void write_chaos_csv_row(std::ostream& os, std::uint64_t rep, const std::string& chain_id,
                         const ChaosSample& s) {
  const auto old = os.precision(17);
  os << rep << ',' << chain_id << ',' << s.raw << ',' << s.normalized << '\n';
  os.precision(old);
}

}  // namespace berry
