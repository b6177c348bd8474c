// Binary-classification metrics at the 0.5 threshold, the per-experiment
// communication cost product, and the experiment report writers.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fanet {

struct ConfusionMatrix {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

// predictions at the fixed 0.5 threshold; probabilities >= 0.5 count as
// positive
ConfusionMatrix confusion_at_half(const std::vector<double>& probs,
                                  const std::vector<int>& labels);

// detection rate and false positive rate are undefined when their class is
// absent; they are reported as not-applicable rather than zero
struct Rate {
    double value = 0.0;
    bool applicable = false;
};

struct MetricSet {
    double accuracy = 0.0;
    Rate detection_rate;
    Rate false_positive_rate;
};

MetricSet metrics(const ConfusionMatrix& cm);

// bytes moved by a weight-exchange schedule: nodes x weights per model x
// rounds x bytes per weight, exact integer product
std::uint64_t comm_cost(std::uint64_t nodes, std::uint64_t weights_per_model,
                        std::uint64_t rounds, std::uint64_t bytes_per_weight);

// one finished experiment; weights_per_model must equal the true parameter
// count of the named model
struct ExperimentRecord {
    std::string attack;
    double attacker_ratio = 0.0;
    int topologies = 1;  // networks pooled into the client population
    std::string variant;
    std::string model;
    int shot = 0;
    int rounds = 0;
    double learning_rate = 0.0;
    int batch_size = 0;
    std::uint64_t seed = 0;
    ConfusionMatrix cm;
    long nodes = 0;
    long weights_per_model = 0;
    long comm_rounds = 0;
    long bytes_per_weight = 0;
    double wall_seconds = 0.0;
};

// one row per record in input order, grouped by the plan fields; a group with
// several seeds gains a mean row carrying population-sd columns
void write_report_csv(const std::string& path,
                      const std::vector<ExperimentRecord>& records);

// per-setting percentage lines; adds an attack x ratio x model table when the
// records cover all thirty cells of the comparison grid
void write_summary_text(const std::string& path,
                        const std::vector<ExperimentRecord>& records);

// inverse of write_report_csv for per-seed rows; derived mean rows are dropped
// because they reconstruct from the rows around them
std::vector<ExperimentRecord> read_report_csv(const std::string& path);

}  // namespace fanet
