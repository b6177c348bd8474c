// Learning-rate search: random sampling refined by successive halving.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fanet/federated.hpp"

namespace fanet {

struct SearchSpace {
    double learning_rate_lo = 0.001;  // sampled log-uniform inside [lo, hi]
    double learning_rate_hi = 0.01;
    int batch_size = 5;
};

struct TrialConfig {
    int sample_index = 0;  // global draw order; breaks score ties
    double learning_rate = 0.0;
    int batch_size = 5;
};

// score must be finite and higher-is-better; NaN or inf disqualifies the trial
using Objective = std::function<double(const TrialConfig&, long resource)>;

struct LedgerRow {
    int bracket = 0;
    int rung = 0;
    int sample_index = 0;
    double learning_rate = 0.0;
    int batch_size = 5;
    long resource = 0;
    double score = 0.0;
    bool disqualified = false;
};

struct HyperbandResult {
    TrialConfig best;
    double best_score = 0.0;
    std::vector<LedgerRow> ledger;
    long total_resource = 0;
    long scheduled_resource = 0;
    int brackets = 0;
};

// closed-form schedule; bracket b opens with eta^b configs and every bracket
// finishes at the full budget
int bracket_count(long budget, long eta);
std::vector<long> bracket_rung_sizes(long budget, long eta, int bracket);
std::vector<long> bracket_rung_resources(long budget, long eta, int bracket);
long schedule_total(long budget, long eta);

// evaluates every config at each rung resource in sample order and keeps the
// top floor(n/eta) for the next rung; disqualified trials stay in the rows
std::vector<LedgerRow> successive_halving(const std::vector<TrialConfig>& configs,
                                          const Objective& objective,
                                          const std::vector<long>& rung_resources,
                                          long eta, int bracket_label = 0);

HyperbandResult run_hyperband(const SearchSpace& space, const Objective& objective,
                              long budget, long eta, std::uint64_t seed);

void write_ledger_csv(const std::string& path, const std::vector<LedgerRow>& ledger);

// scores a config by training on 80% of each client's training rows and
// reading accuracy on the held-out 20%; the real test split is never touched
Objective make_validation_objective(const ExperimentPlan& plan,
                                    const std::vector<ClientSplit>& splits);

}  // namespace fanet
