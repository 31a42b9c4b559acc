#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jced/baselines.hpp"
#include "jced/channel_gen.hpp"
#include "jced/config.hpp"
#include "jced/prior_fit.hpp"
#include "jced/turbo.hpp"

namespace jced {

enum class Algo { GampMc, Gamp, Lmmse, Lasso, Pcsi, Bsg };

std::string algo_name(Algo a);
Algo algo_from_name(const std::string& name);

struct ExperimentSpec {
    // Frame dimensioning; the code rate is derived from eta at each sweep
    // point so the spectral efficiency stays fixed.
    int n = 256, l = 64, m = 4, np = 0, mt = 112, q = 2;
    double eta = 2.0;
    double ebn0_db = 11.0;  // used when the sweep variable is np or mt

    ReceiverConfig receiver;
    std::vector<Algo> algos{Algo::GampMc, Algo::Gamp, Algo::Lmmse, Algo::Pcsi};
    std::string sweep = "ebn0_db";  // ebn0_db | np | mt
    std::vector<double> grid{11.0};
    int trials = 200;
    std::uint64_t master_seed = 1;
    int workers = 0;  // 0 = hardware concurrency
    bool stable_timing = false;

    SalehValenzuelaParams sv;
    PulsePair pulses;
    std::string prior_file;  // empty: fit from fresh realizations
    int prior_fit_realizations = 3000;
    int calib_realizations = 2000;

    std::string out_dir = "out";
    bool write_diagnostics = false;

    static ExperimentSpec from_config(const Config& cfg);
    void validate() const;
};

// Channel statistics shared by every arm: calibrated generator scale, fitted
// GM2-HMM prior and PDP. Deterministic given the master seed.
struct ChannelSetup {
    SalehValenzuelaParams sv;  // amplitude_scale calibrated
    PulsePair pulses;
    Gm2HmmPrior prior;
    std::vector<double> pdp;
    double max_lambda_shift = 0.0;
};

ChannelSetup prepare_channel(const ExperimentSpec& spec);

struct ResultRow {
    double sweep_value = 0.0;
    std::string algo;
    std::string iter;  // "1", "2" or "fin"
    double ber = 0.0;
    double nmse_db = 0.0;      // 10 log10(mean linear NMSE)
    double nmse_med_db = 0.0;  // 10 log10(median linear NMSE)
    double time_per_turbo_ms = 0.0;
    double turbo_iters_mean = 0.0;
    int trials = 0;
    int failures = 0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<std::string> diagnostics;  // one JSON line per (trial, algo)
    ChannelSetup setup;
    bool any_total_failure = false;  // some (point, algo) lost every trial
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

std::string csv_header();
void write_csv(const std::string& path, const std::vector<ResultRow>& rows, bool stable_timing);
void write_jsonl(const std::string& path, const std::vector<std::string>& lines);
std::vector<ResultRow> read_csv(const std::string& path);

}  // namespace jced
