#include "anderson/problems.hpp"

#include <stdexcept>

namespace anderson {

namespace {

ProblemKind kind_from_string(const std::string& s) {
  if (s == "linear") return ProblemKind::linear;
  if (s == "bratu") return ProblemKind::bratu;
  if (s == "admixture") return ProblemKind::admixture;
  throw std::invalid_argument("unknown problem type '" + s + "'");
}

StartKind start_from_string(const std::string& s) {
  if (s == "zero") return StartKind::zero;
  if (s == "uniform") return StartKind::uniform;
  if (s == "default") return StartKind::problem_default;
  throw std::invalid_argument("unknown x0 kind '" + s + "' (expected zero|uniform|default)");
}

std::string_view to_string(StartKind k) {
  switch (k) {
    case StartKind::zero: return "zero";
    case StartKind::uniform: return "uniform";
    case StartKind::problem_default: return "default";
  }
  return "default";
}

Vector uniform_start(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = u(rng);
  return x;
}

}  // namespace

std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::linear: return "linear";
    case ProblemKind::bratu: return "bratu";
    case ProblemKind::admixture: return "admixture";
  }
  return "unknown";
}

ProblemDescriptor ProblemDescriptor::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("problem descriptor must be a JSON object");
  ProblemDescriptor d;
  d.kind = kind_from_string(j.at("type").get<std::string>());
  d.seed = j.value("seed", std::uint64_t{0});
  d.n = j.value("n", d.n);
  if (j.contains("diag")) {
    const auto values = j.at("diag").get<std::vector<double>>();
    d.diag = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    d.n = static_cast<int>(values.size());
  }
  d.grid_n = j.value("grid_n", d.grid_n);
  d.lambda = j.value("lambda", d.lambda);
  d.K = j.value("K", d.K);
  d.J = j.value("J", d.J);
  d.n_ind = j.value("n_ind", d.n_ind);
  if (j.contains("x0")) d.start = start_from_string(j.at("x0").get<std::string>());
  if (d.n < 1 || d.grid_n < 1) throw std::invalid_argument("problem dimensions must be >= 1");
  return d;
}

nlohmann::json ProblemDescriptor::to_json() const {
  nlohmann::json j{{"type", std::string(to_string(kind))},
                   {"seed", seed},
                   {"x0", std::string(to_string(start))}};
  switch (kind) {
    case ProblemKind::linear:
      j["n"] = n;
      if (diag) j["diag"] = std::vector<double>(diag->data(), diag->data() + diag->size());
      break;
    case ProblemKind::bratu:
      j["grid_n"] = grid_n;
      j["lambda"] = lambda;
      break;
    case ProblemKind::admixture:
      j["K"] = K;
      j["J"] = J;
      j["n_ind"] = n_ind;
      break;
  }
  return j;
}

double ProblemDescriptor::default_tol() const {
  return kind == ProblemKind::admixture ? 1e-4 : 1e-8;
}

double ProblemDescriptor::default_cond_limit() const {
  return kind == ProblemKind::admixture ? 1e5 : 1e12;
}

ProblemInstance build_problem(const ProblemDescriptor& desc, std::uint64_t draw_seed) {
  ProblemInstance inst;
  inst.name = std::string(to_string(desc.kind));
  switch (desc.kind) {
    case ProblemKind::linear: {
      LinearDiagProblem p;
      if (desc.diag) {
        p.diag = *desc.diag;
        p.b = Vector::Ones(p.diag.size());
      } else if (desc.n == 19) {
        p = LinearDiagProblem::reference_instance();
      } else {
        p.diag = Vector::LinSpaced(desc.n, 0.1, 1.9);
        p.b = Vector::Ones(desc.n);
      }
      p.x0 = desc.start == StartKind::uniform ? uniform_start(p.diag.size(), draw_seed)
                                              : Vector::Zero(p.diag.size());
      p.validate();
      inst.mapping = p.as_mapping();
      inst.x0 = p.x0;
      inst.linear = std::move(p);
      break;
    }
    case ProblemKind::bratu: {
      auto p = BratuProblem::make(desc.grid_n, desc.lambda);
      inst.x0 = desc.start == StartKind::zero ? Vector::Zero(p.dimension())
                                              : uniform_start(p.dimension(), draw_seed);
      inst.mapping = p.as_mapping();
      inst.bratu = std::move(p);
      break;
    }
    case ProblemKind::admixture: {
      auto p = gen_admixture_data(draw_seed, desc.K, desc.J, desc.n_ind);
      switch (desc.start) {
        case StartKind::zero: inst.x0 = Vector::Zero(p.dimension()); break;
        case StartKind::uniform: inst.x0 = uniform_start(p.dimension(), draw_seed); break;
        case StartKind::problem_default: inst.x0 = p.start; break;
      }
      inst.mapping = p.as_mapping();
      inst.admixture = std::move(p);
      break;
    }
  }
  return inst;
}

}  // namespace anderson
