#include "ddcd/constitutive.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace ddcd {

ConstitutiveLaw ConstitutiveLaw::linear(const Vec6& stiffness) {
  return {Variant::Linear, stiffness, Vec6::Zero()};
}

ConstitutiveLaw ConstitutiveLaw::explicit_quadratic(const Vec6& stiffness, double factor) {
  return {Variant::ExplicitQuadratic, stiffness, factor * stiffness};
}

ConstitutiveLaw ConstitutiveLaw::implicit_quadratic(const Vec6& stiffness, double factor) {
  return {Variant::ImplicitQuadratic, stiffness, factor * stiffness.cwiseInverse()};
}

void ConstitutiveLaw::validate() const {
  for (int i = 0; i < 6; ++i) {
    if (!(stiffness[i] > 0.0) || !std::isfinite(stiffness[i])) {
      throw InvalidInput("stiffness entry " + std::to_string(i + 1) + " must be positive");
    }
    if (!std::isfinite(quadratic[i])) {
      throw InvalidInput("quadratic entry " + std::to_string(i + 1) + " must be finite");
    }
  }
}

const char* to_string(ConstitutiveLaw::Variant v) {
  switch (v) {
    case ConstitutiveLaw::Variant::Linear:
      return "linear";
    case ConstitutiveLaw::Variant::ExplicitQuadratic:
      return "explicit_quadratic";
    case ConstitutiveLaw::Variant::ImplicitQuadratic:
      return "implicit_quadratic";
  }
  return "unknown";
}

ConstitutiveLaw::Variant parse_variant(const std::string& name) {
  if (name == "linear") return ConstitutiveLaw::Variant::Linear;
  if (name == "explicit_quadratic") return ConstitutiveLaw::Variant::ExplicitQuadratic;
  if (name == "implicit_quadratic") return ConstitutiveLaw::Variant::ImplicitQuadratic;
  throw InvalidInput("unknown constitutive law '" + name + "'");
}

Vec6 residual_h(const ConstitutiveLaw& law, const Vec6& e, const Vec6& s) {
  const Vec6& a = law.stiffness;
  const Vec6& b = law.quadratic;
  switch (law.variant) {
    case ConstitutiveLaw::Variant::Linear:
      return s - a.cwiseProduct(e);
    case ConstitutiveLaw::Variant::ExplicitQuadratic:
      return s - a.cwiseProduct(e) - 0.5 * b.cwiseProduct(e.cwiseAbs2());
    case ConstitutiveLaw::Variant::ImplicitQuadratic:
      return e - law.compliance().cwiseProduct(s) - 0.5 * b.cwiseProduct(s.cwiseAbs2());
  }
  return Vec6::Zero();
}

ManifoldDerivatives residual_h_derivatives(const ConstitutiveLaw& law, const Vec6& e,
                                           const Vec6& s) {
  const Vec6& a = law.stiffness;
  const Vec6& b = law.quadratic;
  ManifoldDerivatives d;
  switch (law.variant) {
    case ConstitutiveLaw::Variant::Linear:
      d.d_strain = (-a).asDiagonal();
      d.d_stress = Mat6::Identity();
      break;
    case ConstitutiveLaw::Variant::ExplicitQuadratic:
      d.d_strain = (-(a + b.cwiseProduct(e))).asDiagonal();
      d.d_stress = Mat6::Identity();
      break;
    case ConstitutiveLaw::Variant::ImplicitQuadratic:
      d.d_strain = Mat6::Identity();
      d.d_stress = (-(law.compliance() + b.cwiseProduct(s))).asDiagonal();
      break;
  }
  return d;
}

ManifoldCurvature residual_h_curvature(const ConstitutiveLaw& law, const Vec6& xi) {
  ManifoldCurvature c{Mat6::Zero(), Mat6::Zero(), Mat6::Zero()};
  switch (law.variant) {
    case ConstitutiveLaw::Variant::Linear:
      break;
    case ConstitutiveLaw::Variant::ExplicitQuadratic:
      c.strain_strain = (-law.quadratic.cwiseProduct(xi)).asDiagonal();
      break;
    case ConstitutiveLaw::Variant::ImplicitQuadratic:
      c.stress_stress = (-law.quadratic.cwiseProduct(xi)).asDiagonal();
      break;
  }
  return c;
}

Vec6 stress_for_strain(const ConstitutiveLaw& law, const Vec6& e) {
  const Vec6& a = law.stiffness;
  const Vec6& b = law.quadratic;
  switch (law.variant) {
    case ConstitutiveLaw::Variant::Linear:
      return a.cwiseProduct(e);
    case ConstitutiveLaw::Variant::ExplicitQuadratic:
      return a.cwiseProduct(e) + 0.5 * b.cwiseProduct(e.cwiseAbs2());
    case ConstitutiveLaw::Variant::ImplicitQuadratic: {
      // b/2 s^2 + c s - e = 0; the branch through the origin written in the
      // cancellation-free form s = 2e / (c + sqrt(c^2 + 2 b e)).
      const Vec6 c = law.compliance();
      Vec6 s;
      for (int i = 0; i < 6; ++i) {
        const double disc = c[i] * c[i] + 2.0 * b[i] * e[i];
        if (disc < 0.0) {
          throw InvalidInput("strain component " + std::to_string(i + 1) +
                             " lies beyond the fold of the implicit law");
        }
        s[i] = 2.0 * e[i] / (c[i] + std::sqrt(disc));
      }
      return s;
    }
  }
  return Vec6::Zero();
}

ManifoldValidation validate_manifold(const ConstitutiveLaw& law, const MeasurementDataSet& data,
                                     double tolerance) {
  if (data.empty()) throw InvalidInput("data set is empty");
  if (!(tolerance > 0.0)) throw InvalidInput("manifold tolerance must be positive");
  ManifoldValidation out;
  for (const auto& p : data.points) {
    out.max_residual =
        std::max(out.max_residual, residual_h(law, p.strain, p.stress).lpNorm<Eigen::Infinity>());
  }
  out.pass = out.max_residual <= tolerance;
  return out;
}

ConsistencyReport consistency_check(const ConstitutiveLaw& law, double strain_range,
                                    double stress_range) {
  ConsistencyReport report;
  for (int i = 0; i < 6; ++i) {
    const double b = law.quadratic[i];
    if (b == 0.0) continue;
    SpuriousRoot root;
    root.component = i;
    switch (law.variant) {
      case ConstitutiveLaw::Variant::Linear:
        continue;
      case ConstitutiveLaw::Variant::ExplicitQuadratic:
        // -a e - b/2 e^2 = 0
        root.on_strain_axis = true;
        root.location = -2.0 * law.stiffness[i] / b;
        root.in_operating_range = std::abs(root.location) <= strain_range;
        break;
      case ConstitutiveLaw::Variant::ImplicitQuadratic:
        // -c s - b/2 s^2 = 0
        root.on_strain_axis = false;
        root.location = -2.0 / (law.stiffness[i] * b);
        root.in_operating_range = std::abs(root.location) <= stress_range;
        break;
    }
    if (root.in_operating_range) report.pass = false;
    report.spurious_roots.push_back(root);
  }
  return report;
}

MeasurementDataSet sample_data_set(const ConstitutiveLaw& law, const StrainBox& box, int count,
                                   double noise, std::uint64_t seed) {
  if (count < 1) throw InvalidInput("sample count must be at least 1");
  if (!(noise >= 0.0)) throw InvalidInput("noise amplitude must be non-negative");
  for (int i = 0; i < 6; ++i) {
    if (!std::isfinite(box.lower[i]) || !std::isfinite(box.upper[i]) || box.lower[i] > box.upper[i]) {
      throw InvalidInput("degenerate strain box in component " + std::to_string(i + 1));
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto symmetric = [&] { return noise * (2.0 * unit(rng) - 1.0); };

  MeasurementDataSet data;
  data.provenance = std::string("sampled:") + to_string(law.variant) + ":seed=" + std::to_string(seed);
  data.points.reserve(count);
  constexpr int kMaxAttempts = 1000;
  for (int n = 0; n < count; ++n) {
    DataPoint p;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      for (int i = 0; i < 6; ++i) {
        p.strain[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * unit(rng);
      }
      try {
        p.stress = stress_for_strain(law, p.strain);
        ok = true;
      } catch (const InvalidInput&) {
      }
    }
    if (!ok) throw InvalidInput("strain box lies beyond the fold of the implicit law");
    if (noise > 0.0) {
      for (int i = 0; i < 6; ++i) {
        switch (law.variant) {
          case ConstitutiveLaw::Variant::Linear:
            p.strain[i] += symmetric();
            p.stress[i] += symmetric();
            break;
          case ConstitutiveLaw::Variant::ExplicitQuadratic:
            p.stress[i] += symmetric();
            break;
          case ConstitutiveLaw::Variant::ImplicitQuadratic:
            p.strain[i] += symmetric();
            break;
        }
      }
    }
    data.points.push_back(p);
  }
  return data;
}

MeasurementDataSet grid_data_set(const ConstitutiveLaw& law, const StrainBox& box, double spacing) {
  if (!(spacing > 0.0)) throw InvalidInput("grid spacing must be positive");
  std::vector<int> active;
  std::vector<int> counts;
  for (int i = 0; i < 6; ++i) {
    if (box.lower[i] > box.upper[i]) throw InvalidInput("degenerate strain box");
    if (box.upper[i] > box.lower[i]) {
      active.push_back(i);
      counts.push_back(static_cast<int>(std::floor((box.upper[i] - box.lower[i]) / spacing + 1e-9)) + 1);
    }
  }
  MeasurementDataSet data;
  std::ostringstream prov;
  prov << "grid:" << to_string(law.variant) << ":h=" << spacing;
  data.provenance = prov.str();
  std::vector<int> index(active.size(), 0);
  while (true) {
    DataPoint p;
    p.strain = box.lower;
    for (std::size_t k = 0; k < active.size(); ++k) {
      p.strain[active[k]] = box.lower[active[k]] + spacing * index[k];
    }
    p.stress = stress_for_strain(law, p.strain);
    data.points.push_back(p);
    std::size_t k = 0;
    for (; k < active.size(); ++k) {
      if (++index[k] < counts[k]) break;
      index[k] = 0;
    }
    if (k == active.size()) break;
  }
  return data;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& text, double& value) {
  std::istringstream ss(text);
  ss.imbue(std::locale::classic());
  ss >> value;
  if (ss.fail()) return false;
  ss >> std::ws;
  return ss.eof();
}

}  // namespace

MeasurementDataSet read_data_set_csv(std::istream& in, const std::string& provenance) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(provenance + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() != 12) throw InvalidInput(provenance + ": header must have 12 columns");
  double probe = 0.0;
  bool all_numeric = true;
  for (const auto& h : header) all_numeric = all_numeric && parse_double(h, probe);
  if (all_numeric) throw InvalidInput(provenance + ": header row required");

  MeasurementDataSet data;
  data.provenance = provenance;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 12) {
      throw InvalidInput(provenance + ":" + std::to_string(line_no) + ": expected 12 columns");
    }
    DataPoint p;
    for (int i = 0; i < 12; ++i) {
      double v = 0.0;
      if (!parse_double(cells[i], v) || !std::isfinite(v)) {
        throw InvalidInput(provenance + ":" + std::to_string(line_no) + ": bad number '" +
                           cells[i] + "'");
      }
      (i < 6 ? p.strain[i] : p.stress[i - 6]) = v;
    }
    data.points.push_back(p);
  }
  if (data.empty()) throw InvalidInput(provenance + ": data set is empty");
  return data;
}

MeasurementDataSet load_data_set_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open data set '" + path + "'");
  return read_data_set_csv(in, path);
}

void write_data_set_csv(std::ostream& out, const MeasurementDataSet& data) {
  out.imbue(std::locale::classic());
  out << "e1,e2,e3,e4,e5,e6,s1,s2,s3,s4,s5,s6\n";
  out << std::setprecision(17);
  for (const auto& p : data.points) {
    for (int i = 0; i < 6; ++i) out << p.strain[i] << ',';
    for (int i = 0; i < 6; ++i) out << p.stress[i] << (i == 5 ? '\n' : ',');
  }
}

}  // namespace ddcd
