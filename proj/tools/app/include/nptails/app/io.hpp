#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nptails/asymptotics.hpp"
#include "nptails/evolution.hpp"
#include "nptails/np_constants.hpp"
#include "nptails/time_integral.hpp"

namespace nptails::app {

// 17 significant digits, '.' decimal point, independent of the locale.
std::string format_double(double x);

// Columns of an observer CSV.
struct SeriesTable {
  std::string id;
  std::vector<double> tau, u, v, r, phi, psi, Tpsi, T2psi, v2dvphi;

  const std::vector<double>& column(const std::string& name) const;
};

SeriesTable to_table(const ObserverSeries& s);
void write_observer_csv(const std::filesystem::path& file, const SeriesTable& t);
SeriesTable read_observer_csv(const std::filesystem::path& file);

// Centred differences at fixed spacing; NaN at the ends.
std::vector<double> centred_difference(const std::vector<double>& t, const std::vector<double>& y);

// Fit input for a scenario: horizon fits run in v, the rest in tau.
// phi-derived fields (Tphi, T2phi) are differenced here.
FitInput fit_input(const SeriesTable& t, const std::string& field, Scenario scenario);

nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const NpReport& r);
NpReport npreport_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TailFit& f);
nlohmann::json to_json(const Diagnostics& d);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& file);

// r, D, D', r* on a grid geometric in r - r_min.
void write_model_csv(const std::filesystem::path& file, const CoordinateMap& map, int points);

// v, phi^(k) on the cone for one link of the time-integral chain.
void write_chain_csv(const std::filesystem::path& file, const TimeIntegralData& t, double v0,
                     double v_max, int points);

}  // namespace nptails::app
