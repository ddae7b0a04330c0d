#include "bayinv/report.hpp"

#include <cstdio>
#include <sstream>

namespace bayinv {

using nlohmann::json;

std::string format_number(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const Vector& v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v[i]);
  return a;
}

json to_json(const Box& box)
{
  json a = json::array();
  for (const auto& iv : box.intervals())
    a.push_back({iv.lower, iv.upper});
  return a;
}

json to_json(const KernelSpec& spec)
{
  return {{"family", to_string(spec.family)},
          {"length_scale", spec.length_scale},
          {"signal_variance", spec.signal_variance}};
}

json to_json(const BoTrace& trace)
{
  json iters = json::array();
  for (const auto& it : trace.iterations) {
    json acquired = json::array();
    for (const auto& x : it.acquired)
      acquired.push_back(to_json(x));
    iters.push_back({{"iteration", it.iteration},
                     {"n_samples", it.n_samples},
                     {"acquired", acquired},
                     {"mse", it.mse},
                     {"kernel", to_json(it.kernel)},
                     {"jitter", it.jitter},
                     {"log_marginal_likelihood", it.log_marginal_likelihood}});
  }
  json inputs = json::array();
  for (const auto& x : trace.data.inputs)
    inputs.push_back(to_json(x));
  json validation = json::array();
  for (const auto& x : trace.validation_points)
    validation.push_back(to_json(x));

  json out = {{"iterations", iters},
              {"converged", trace.converged},
              {"budget_exhausted", trace.budget_exhausted},
              {"dataset", {{"bounds", to_json(trace.data.bounds)},
                           {"inputs", inputs},
                           {"outputs", trace.data.outputs}}},
              {"validation_points", validation}};
  if (trace.model) {
    out["final_model"] = {{"kernel", to_json(trace.model->kernel())},
                          {"noise_variance", trace.model->noise_variance()},
                          {"jitter", trace.model->jitter()},
                          {"log_marginal_likelihood", trace.model->log_marginal_likelihood()}};
  }
  return out;
}

json to_json(const PosteriorSummary& summary)
{
  json clusters = json::array();
  for (const auto& c : summary.map_clusters)
    clusters.push_back({{"x_map", to_json(c.x)},
                        {"ls_residual", c.ls_residual},
                        {"objective", c.objective},
                        {"members", c.members},
                        {"on_bound", c.on_bound},
                        {"gradient_norm", c.gradient_norm}});
  json regions = json::array();
  for (const auto& b : summary.hp_regions)
    regions.push_back(to_json(b));
  json starts = json::array();
  for (const auto& s : summary.starts)
    starts.push_back({{"start", to_json(s.start)},
                      {"end", to_json(s.end)},
                      {"value", s.value},
                      {"converged", s.converged},
                      {"status", s.status}});

  json out = {{"map_clusters", clusters},
              {"multimodal", summary.multimodal},
              {"hp_threshold", summary.hp_threshold},
              {"hp_threshold_applies_to", "max-normalized NLS on the profile grid"},
              {"hp_regions", regions},
              {"starts", starts}};
  if (summary.laplace) {
    const LaplaceResult& l = *summary.laplace;
    json lap = {{"valid", l.valid}, {"level", l.level}, {"local_only", l.local_only}};
    if (!l.diagnostic.empty())
      lap["diagnostic"] = l.diagnostic;
    auto matrix = [](const Matrix& m) {
      json rows = json::array();
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
          r.push_back(m(i, j));
        rows.push_back(r);
      }
      return rows;
    };
    if (l.hessian.size() > 0)
      lap["hessian"] = matrix(l.hessian);
    if (l.valid) {
      lap["covariance"] = matrix(l.covariance);
      json ivs = json::array();
      for (const auto& iv : l.intervals)
        ivs.push_back({iv.lower, iv.upper});
      lap["credible_intervals"] = ivs;
    }
    out["laplace"] = lap;
  } else {
    out["laplace"] = nullptr;
  }
  return out;
}

namespace {

void put_point(std::ostringstream& os, const Vector& x)
{
  for (Eigen::Index k = 0; k < x.size(); ++k)
    os << format_number(x[k]) << ',';
}

std::string coord_header(std::size_t dim)
{
  return dim == 1 ? "x," : "x,y,";
}

} // namespace

std::string trace_csv(const BoTrace& trace)
{
  std::ostringstream os;
  os << "iteration,n_samples,mse\n";
  for (const auto& it : trace.iterations)
    os << it.iteration << ',' << it.n_samples << ',' << format_number(it.mse) << '\n';
  return os.str();
}

std::string profiles_csv(const ProfileGrid& grid)
{
  std::ostringstream os;
  const std::size_t dim = grid.points.empty() ? 1 : static_cast<std::size_t>(grid.points[0].size());
  os << coord_header(dim) << "ls,nls,nls_normalized\n";
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    put_point(os, grid.points[i]);
    os << format_number(grid.ls[i]) << ',' << format_number(grid.nls[i]) << ','
       << format_number(grid.nls_normalized[i]) << '\n';
  }
  return os.str();
}

std::string chain_csv(const ChainResult& chain)
{
  std::ostringstream os;
  const std::size_t dim = static_cast<std::size_t>(chain.initial_state.size());
  os << "step," << coord_header(dim) << "accepted\n";
  for (std::size_t i = 0; i < chain.samples.size(); ++i) {
    os << chain.steps[i] << ',';
    put_point(os, chain.samples[i]);
    os << (chain.accepted[i] ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string density_csv(const std::vector<double>& grid, const std::vector<double>& density)
{
  std::ostringstream os;
  os << "x,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    os << format_number(grid[i]) << ',' << format_number(density[i]) << '\n';
  return os.str();
}

std::string kde_overlay_csv(const std::vector<double>& grid,
                            const std::vector<std::vector<double>>& kdes)
{
  std::ostringstream os;
  os << 'x';
  for (std::size_t c = 0; c < kdes.size(); ++c)
    os << ",chain_" << c;
  os << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << format_number(grid[i]);
    for (const auto& k : kdes)
      os << ',' << format_number(k[i]);
    os << '\n';
  }
  return os.str();
}

std::string grid_posterior_csv(const GridPosterior& posterior)
{
  std::ostringstream os;
  const std::size_t dim =
    posterior.points.empty() ? 1 : static_cast<std::size_t>(posterior.points[0].size());
  os << coord_header(dim) << "density\n";
  for (std::size_t i = 0; i < posterior.points.size(); ++i) {
    put_point(os, posterior.points[i]);
    os << format_number(posterior.density[i]) << '\n';
  }
  return os.str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows)
{
  std::ostringstream os;
  os << "benchmark,family,n_samples,mse\n";
  for (const auto& r : rows)
    os << r.benchmark << ',' << r.family << ',' << r.n_samples << ',' << format_number(r.mse)
       << '\n';
  return os.str();
}

} // namespace bayinv
