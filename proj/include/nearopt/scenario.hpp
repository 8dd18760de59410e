#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace nearopt::scenario {

using Series = std::vector<double>;

// One weather year at desk scale: every series has `snapshots` entries except
// the daily temperatures, which have one entry per day.
struct Scenario {
  std::string id;
  int snapshots = 0;
  double step_hours = 3.0;
  std::map<std::string, Series> capacity_factors;   // by series id, in [0,1]
  std::map<std::string, Series> loads;              // by bus, MW
  std::map<std::string, Series> inflows;            // by plant, MWh per step
  std::map<std::string, Series> daily_temperature;  // by region, degC

  // Throws DataError on length mismatches, out-of-range factors or negative loads.
  void validate() const;
};

// --- degree days and regressions -------------------------------------------

inline constexpr double kDegreeDayBase = 15.5;

struct DegreeDays {
  double hdd = 0.0;
  double cdd = 0.0;
};

DegreeDays degree_days(double daily_temp);

// Day-type labels: 0 = Monday ... 6 = Sunday; holidays are flagged separately
// and treated as Sundays by the fits.
struct Calendar {
  std::vector<int> weekday;     // per day
  std::vector<bool> holiday;    // per day, may be empty
  int days() const { return static_cast<int>(weekday.size()); }
  int label(int day) const;     // weekday, or 6 on holidays
  // Consecutive days starting on `first_weekday`, no holidays.
  static Calendar consecutive(int days, int first_weekday = 0);
};

struct WeeklyProfile {
  std::vector<double> profile;  // 168 entries, mean 1
  double trend = 0.0;           // per hour
  double trend_p_value = 1.0;
};

struct SignificanceOptions {
  double level = 0.05;
};

// Divides each hour by its daily mean, then fits trend + 168 hour-of-week
// levels. The profile is rescaled to mean 1 (trend rescaled alongside).
WeeklyProfile fit_weekly_profile(const Series& hourly_load, const Calendar& calendar,
                                 const SignificanceOptions& options = {});
// Same fit on values that are already normalised by their daily mean.
WeeklyProfile fit_normalised_weekly_profile(const Series& normalised, const Calendar& calendar,
                                            const SignificanceOptions& options = {});

struct DailyRegression {
  std::vector<double> weekday;  // 7 intercepts, MW
  double heating = 0.0;         // MW per degC-day
  double cooling = 0.0;
};

DailyRegression fit_daily_regression(const Series& daily_load, const Series& daily_temp,
                                     const Calendar& calendar,
                                     const SignificanceOptions& options = {});

struct LoadRegressionParams {
  WeeklyProfile weekly;
  DailyRegression daily;
};

struct SynthesizedLoad {
  Series load;
  int clamped = 0;  // hours where the model went negative and was set to 0
};

SynthesizedLoad synthesize_load(const LoadRegressionParams& params, const Series& daily_temp,
                                const Calendar& calendar, double scale = 1.0);

double normalize_hydro(double generation, double capacity_that_year, double reference_capacity);

// Mean over consecutive blocks of `step_hours` hourly values.
Series average_to_steps(const Series& hourly, double step_hours);

// Typical shape for a bus with the given mean load: two daily peaks, lower
// weekends, heating-driven winter demand.
LoadRegressionParams default_load_model(double mean_load);

// --- synthetic base scenario -------------------------------------------------

struct SyntheticSeries {
  std::string id;
  std::string kind;     // "solar" or "wind"
  double mean = 0.3;    // target mean capacity factor
  double variability = 1.0;
};

struct SyntheticSpec {
  std::string id = "base";
  int days = 28;
  double step_hours = 3.0;
  std::uint64_t seed = 1;
  int first_weekday = 0;
  std::vector<SyntheticSeries> capacity_factors;
  std::map<std::string, double> inflow_means;        // MWh per step
  std::map<std::string, std::string> bus_region;     // bus -> temperature region
  std::map<std::string, double> mean_load;           // bus -> MW
  std::map<std::string, double> region_temperature;  // region -> mean degC
  double load_scale = 1.0;
};

Scenario synthetic_scenario(const SyntheticSpec& spec);

// --- scenario generation ----------------------------------------------------

struct PerturbationConfig {
  double cf_amplitude = 0.15;     // relative amplitude scaling band
  double cf_phase_steps = 2.0;    // max circular shift, in steps
  double temperature_shift = 3.0; // degC band
  double inflow_scale = 0.2;      // relative band
  double load_scale = 0.0;        // relative band on loads

  bool zero() const;
};

// Regenerates loads from each scenario's perturbed temperatures.
struct LoadSynthesis {
  std::map<std::string, LoadRegressionParams> by_bus;
  std::map<std::string, std::string> bus_region;
  Calendar calendar;
  double scale = 1.0;
};

std::vector<Scenario> generate_scenarios(const Scenario& base, int n, std::uint64_t seed,
                                         const PerturbationConfig& perturbation = {},
                                         const LoadSynthesis* synthesis = nullptr);

// --- I/O ---------------------------------------------------------------------

// CSV with a header row "timestamp,<id>,<id>..." and one row per entry.
std::map<std::string, Series> read_series_csv(std::istream& in);
void write_series_csv(std::ostream& out, const std::map<std::string, Series>& series);

// Directory layout: <dir>/meta.json, capacity_factors.csv, loads.csv,
// inflows.csv, temperature.csv.
void write_scenario(const std::string& dir, const Scenario& s);
Scenario read_scenario(const std::string& dir);

}  // namespace nearopt::scenario
