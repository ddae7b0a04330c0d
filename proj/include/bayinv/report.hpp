#pragma once

#include "bayinv/bo.hpp"
#include "bayinv/experiment.hpp"
#include "bayinv/inversion.hpp"
#include "bayinv/sampling.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace bayinv {

/// 17 significant digits, enough to round-trip any double exactly.
std::string format_number(double v);

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Box& box);
nlohmann::json to_json(const KernelSpec& spec);
nlohmann::json to_json(const BoTrace& trace);
nlohmann::json to_json(const PosteriorSummary& summary);

/// iteration,n_samples,mse
std::string trace_csv(const BoTrace& trace);
/// x[,y],ls,nls,nls_normalized
std::string profiles_csv(const ProfileGrid& grid);
/// step,x[,y],accepted
std::string chain_csv(const ChainResult& chain);
/// x,density
std::string density_csv(const std::vector<double>& grid, const std::vector<double>& density);
/// x,chain_0,chain_1,...
std::string kde_overlay_csv(const std::vector<double>& grid,
                            const std::vector<std::vector<double>>& kdes);
/// x[,y],density
std::string grid_posterior_csv(const GridPosterior& posterior);
/// benchmark,family,n_samples,mse
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

} // namespace bayinv
