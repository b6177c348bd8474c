// The four training layouts over per-UAV datasets: one pooled model, one
// isolated model per client, and weight-averaged federated rounds at full
// or few-shot data volume. Clients hold their samples behind an audited
// boundary; the server side only ever handles weight sets.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fanet/dataset.hpp"
#include "fanet/eval.hpp"
#include "fanet/nn.hpp"

namespace fanet {

enum class IdsVariant { Centralized, Local, Federated, FewShot };

const char* to_string(IdsVariant v);
IdsVariant ids_variant_from_string(const std::string& s);

// communication rounds for the federated variants, training epochs for the
// solo ones
int default_rounds(IdsVariant v);

struct ExperimentPlan {
    IdsVariant variant = IdsVariant::FewShot;
    ArchKind model = ArchKind::Cnn;
    int shot = 36;          // samples per class per client before splitting
    int rounds = 10;        // see default_rounds
    double learning_rate = 0.003;
    int batch_size = 5;
    bool dropout_enabled = true;
    std::uint64_t seed = 0;
};

// raw (unscaled) per-client splits
struct ClientSplit {
    int uav_id = 0;
    Matrix train_x;
    std::vector<int> train_y;
    Matrix test_x;
    std::vector<int> test_y;
};

enum class DataResolution { Decimated, Full };

// per-UAV class pools -> raw splits: optional per-class k-shot subset
// (decimated resolution only), then the floor-rule train fraction per class
std::vector<ClientSplit> make_client_splits(const DatasetBuild& build,
                                            DataResolution resolution, int shot,
                                            double train_frac, std::uint64_t seed);

// A client's data sealed behind audited accessors. The scaler is fit on the
// client's own training rows; both splits are stored already transformed.
class ClientRecord {
public:
    explicit ClientRecord(const ClientSplit& split);

    int uav_id() const { return uav_id_; }
    long train_count() const { return static_cast<long>(train_y_.size()); }
    bool has_train_data() const { return !train_y_.empty(); }
    bool has_test_data() const { return !test_y_.empty(); }
    const Scaler& scaler() const { return scaler_; }

    // sample access, audited by the privacy instrument
    const Matrix& train_features() const;
    const std::vector<int>& train_labels() const;
    const Matrix& test_features() const;
    const std::vector<int>& test_labels() const;

private:
    int uav_id_;
    Scaler scaler_;
    Matrix train_x_;
    std::vector<int> train_y_;
    Matrix test_x_;
    std::vector<int> test_y_;
};

// the client deliberately hands its transformed test split to the
// evaluation site; appends to the pooled set
void export_test_split(const ClientRecord& client, Matrix& x, std::vector<int>& y);

// client runtime for federated rounds; the optimizer state persists across
// rounds so a lone client's trajectory equals plain sequential training
struct FlClient {
    ClientRecord data;
    AdamState adam;
    std::vector<double> loss_log;
};

std::vector<FlClient> make_clients(const std::vector<ClientSplit>& splits, ArchKind kind);

struct RoundLog {
    int round = 0;
    std::vector<int> active_ids;
    std::vector<int> excluded_ids;
    std::vector<double> losses;   // per active client, mean epoch loss
    long messages = 0;            // one down plus one up per active client
    long weights_per_message = 0;
};

// weighted mean of the uploads, weights n_i / sum(n)
WeightSet fedavg_aggregate(const std::vector<WeightSet>& uploads,
                           const std::vector<long>& counts);

// one communication round: broadcast the global weights, train one local
// pass per client with data, aggregate the uploads on the server side
void run_round(Model& global, std::vector<FlClient>& clients, const ExperimentPlan& plan,
               int round_index, RoundLog& log);

struct FederatedResult {
    Model global;
    std::vector<RoundLog> rounds;
    long aggregations = 0;
    long weights_per_model = 0;
    long pooled_test_rows = 0;
    ConfusionMatrix confusion;
    double accuracy = 0.0;
};

// full federated run: seeded init, plan.rounds rounds over all clients,
// final model scored on the union of exported client test splits
FederatedResult run_federated(const ExperimentPlan& plan,
                              const std::vector<ClientSplit>& splits);

struct CentralResult {
    Model model;
    std::vector<double> loss_history;
    long pooled_train_rows = 0;
    ConfusionMatrix confusion;
    double accuracy = 0.0;
};

// all training rows pooled, one scaler fit on the pool, one model trained
// plan.rounds epochs, scored on the pooled test rows
CentralResult run_centralized(const ExperimentPlan& plan,
                              const std::vector<ClientSplit>& splits);

struct LocalResult {
    std::vector<int> client_ids;
    std::vector<Model> models;
    std::vector<ConfusionMatrix> confusions;
    std::vector<double> accuracies;
    std::vector<int> excluded_ids;
    double mean_accuracy = 0.0;
};

// every client trains in isolation, then each model is scored on the union
// of the participants' exported test splits; clients lacking a split are
// excluded and listed
LocalResult run_local(const ExperimentPlan& plan, const std::vector<ClientSplit>& splits);

}  // namespace fanet
