#include "fanet/federated.hpp"

#include <algorithm>
#include <utility>

#include "fanet/errors.hpp"
#include "fanet/privacy.hpp"

namespace fanet {

namespace {

WeightSet arch_zeros(ArchKind kind) {
    WeightSet z;
    for (const auto& shape : arch_shapes(kind)) {
        long n = 1;
        for (int d : shape) n *= d;
        z.tensors.emplace_back(static_cast<std::size_t>(n), 0.0);
    }
    return z;
}

void append_rows(Matrix& x, std::vector<int>& y, const std::vector<Sample>& samples) {
    for (const Sample& s : samples) {
        x.push_back(s.f);
        y.push_back(s.label);
    }
}

TrainConfig client_config(const ExperimentPlan& plan, int uav_id, int round_index) {
    TrainConfig cfg;
    cfg.learning_rate = plan.learning_rate;
    cfg.batch_size = plan.batch_size;
    cfg.epochs = 1;
    cfg.dropout_enabled = plan.dropout_enabled;
    cfg.seed = seed_stream(plan.seed, "client", static_cast<std::uint64_t>(uav_id));
    cfg.first_epoch_index = round_index;
    return cfg;
}

TrainConfig solo_config(const ExperimentPlan& plan) {
    TrainConfig cfg;
    cfg.learning_rate = plan.learning_rate;
    cfg.batch_size = plan.batch_size;
    cfg.epochs = plan.rounds;
    cfg.dropout_enabled = plan.dropout_enabled;
    cfg.seed = seed_stream(plan.seed, "solo");
    cfg.first_epoch_index = 0;
    return cfg;
}

double scored_accuracy(const Model& m, const Matrix& x, const std::vector<int>& y,
                       ConfusionMatrix& cm) {
    std::vector<double> p = forward(m, x, false, nullptr);
    cm = confusion_at_half(p, y);
    return metrics(cm).accuracy;
}

}  // namespace

const char* to_string(IdsVariant v) {
    switch (v) {
        case IdsVariant::Centralized: return "centralized";
        case IdsVariant::Local: return "local";
        case IdsVariant::Federated: return "federated";
        case IdsVariant::FewShot: return "fewshot";
    }
    return "unknown";
}

IdsVariant ids_variant_from_string(const std::string& s) {
    if (s == "centralized") return IdsVariant::Centralized;
    if (s == "local") return IdsVariant::Local;
    if (s == "federated") return IdsVariant::Federated;
    if (s == "fewshot") return IdsVariant::FewShot;
    throw ConfigError("unknown training variant '" + s + "'");
}

int default_rounds(IdsVariant v) { return v == IdsVariant::FewShot ? 10 : 100; }

std::vector<ClientSplit> make_client_splits(const DatasetBuild& build,
                                            DataResolution resolution, int shot,
                                            double train_frac, std::uint64_t seed) {
    std::vector<ClientSplit> out;
    for (const UavData& uav : build.uavs) {
        const UavPair* pool = nullptr;
        UavPair shot_pool;
        if (resolution == DataResolution::Full) {
            pool = &uav.full;
        } else {
            shot_pool = shot_subset(uav, shot, seed);
            pool = &shot_pool;
        }
        SplitPair sp = split_train_test(
            *pool, train_frac,
            seed_stream(seed, "clientsplit", static_cast<std::uint64_t>(uav.topology_id),
                        static_cast<std::uint64_t>(uav.node_id)));
        ClientSplit cs;
        // unique across topologies so client identities never collide
        cs.uav_id = uav.topology_id * 100000 + uav.node_id;
        append_rows(cs.train_x, cs.train_y, sp.train.benign);
        append_rows(cs.train_x, cs.train_y, sp.train.malicious);
        append_rows(cs.test_x, cs.test_y, sp.test.benign);
        append_rows(cs.test_x, cs.test_y, sp.test.malicious);
        out.push_back(std::move(cs));
    }
    return out;
}

ClientRecord::ClientRecord(const ClientSplit& split)
    : uav_id_(split.uav_id), train_y_(split.train_y), test_y_(split.test_y) {
    if (split.train_x.size() != split.train_y.size() ||
        split.test_x.size() != split.test_y.size())
        throw InternalError("split rows and labels differ in length");
    if (!split.train_x.empty()) {
        scaler_ = fit_scaler(split.train_x);
    } else {
        scaler_.std.fill(1.0);  // nothing to fit; identity transform
    }
    train_x_ = transform(scaler_, split.train_x);
    test_x_ = transform(scaler_, split.test_x);
}

const Matrix& ClientRecord::train_features() const {
    PrivacyAudit::note_sample_read();
    return train_x_;
}

const std::vector<int>& ClientRecord::train_labels() const {
    PrivacyAudit::note_sample_read();
    return train_y_;
}

const Matrix& ClientRecord::test_features() const {
    PrivacyAudit::note_sample_read();
    return test_x_;
}

const std::vector<int>& ClientRecord::test_labels() const {
    PrivacyAudit::note_sample_read();
    return test_y_;
}

void export_test_split(const ClientRecord& client, Matrix& x, std::vector<int>& y) {
    const Matrix& tx = client.test_features();
    const std::vector<int>& ty = client.test_labels();
    x.insert(x.end(), tx.begin(), tx.end());
    y.insert(y.end(), ty.begin(), ty.end());
}

std::vector<FlClient> make_clients(const std::vector<ClientSplit>& splits, ArchKind kind) {
    std::vector<FlClient> out;
    WeightSet proto = arch_zeros(kind);
    for (const ClientSplit& s : splits)
        out.push_back(FlClient{ClientRecord(s), make_adam_state(proto), {}});
    return out;
}

WeightSet fedavg_aggregate(const std::vector<WeightSet>& uploads,
                           const std::vector<long>& counts) {
    if (uploads.empty()) throw InternalError("aggregation needs at least one upload");
    if (uploads.size() != counts.size())
        throw InternalError("upload and count lists differ in length");
    long total = 0;
    for (long n : counts) {
        if (n <= 0) throw InternalError("sample counts must be positive");
        total += n;
    }
    for (std::size_t i = 1; i < uploads.size(); ++i)
        if (!uploads[0].same_shape(uploads[i]))
            throw InternalError("upload weight shapes differ");
    WeightSet out = zeros_like(uploads[0]);
    for (std::size_t i = 0; i < uploads.size(); ++i) {
        double lambda = static_cast<double>(counts[i]) / static_cast<double>(total);
        for (std::size_t ti = 0; ti < out.tensors.size(); ++ti) {
            const auto& src = uploads[i].tensors[ti];
            auto& dst = out.tensors[ti];
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j] * lambda;
        }
    }
    return out;
}

void run_round(Model& global, std::vector<FlClient>& clients, const ExperimentPlan& plan,
               int round_index, RoundLog& log) {
    log = RoundLog{};
    log.round = round_index;
    std::vector<WeightSet> uploads;
    std::vector<long> counts;
    for (FlClient& c : clients) {
        if (!c.data.has_train_data()) {
            log.excluded_ids.push_back(c.data.uav_id());
            continue;
        }
        // client-side: one local pass from the broadcast weights
        Model local;
        local.kind = global.kind;
        local.w = global.w;
        TrainConfig cfg = client_config(plan, c.data.uav_id(), round_index);
        std::vector<double> hist =
            train_epochs(local, c.adam, c.data.train_features(), c.data.train_labels(), cfg);
        c.loss_log.push_back(hist.back());
        log.active_ids.push_back(c.data.uav_id());
        log.losses.push_back(hist.back());
        uploads.push_back(std::move(local.w));
        counts.push_back(c.data.train_count());
    }
    if (uploads.empty()) throw ConfigError("no client brought training data to the round");
    // server-side: only weight sets from here on
    PrivacyAudit::ServerScope server;
    global.w = fedavg_aggregate(uploads, counts);
    log.messages = 2 * static_cast<long>(log.active_ids.size());
    log.weights_per_message = global.w.param_count();
}

FederatedResult run_federated(const ExperimentPlan& plan,
                              const std::vector<ClientSplit>& splits) {
    if (plan.variant != IdsVariant::Federated && plan.variant != IdsVariant::FewShot)
        throw ConfigError("plan variant does not use federated rounds");
    if (plan.rounds < 0) throw ConfigError("round count cannot be negative");
    if (splits.empty()) throw ConfigError("no clients supplied");

    std::vector<FlClient> clients = make_clients(splits, plan.model);
    Rng init(seed_stream(plan.seed, "init"));
    FederatedResult res;
    res.global = init_model(plan.model, init);
    res.weights_per_model = arch_param_count(plan.model);
    for (int r = 0; r < plan.rounds; ++r) {
        RoundLog log;
        run_round(res.global, clients, plan, r, log);
        res.rounds.push_back(std::move(log));
        ++res.aggregations;
    }

    // trained clients hand their test split to the evaluation site
    Matrix test_x;
    std::vector<int> test_y;
    for (const FlClient& c : clients)
        if (c.data.has_train_data() && c.data.has_test_data())
            export_test_split(c.data, test_x, test_y);
    if (test_y.empty()) throw ConfigError("no client test data to evaluate");
    res.pooled_test_rows = static_cast<long>(test_y.size());
    res.accuracy = scored_accuracy(res.global, test_x, test_y, res.confusion);
    return res;
}

CentralResult run_centralized(const ExperimentPlan& plan,
                              const std::vector<ClientSplit>& splits) {
    if (plan.variant != IdsVariant::Centralized)
        throw ConfigError("plan variant is not centralized");
    if (plan.rounds < 0) throw ConfigError("epoch count cannot be negative");
    Matrix train_x, test_x;
    std::vector<int> train_y, test_y;
    for (const ClientSplit& s : splits) {
        train_x.insert(train_x.end(), s.train_x.begin(), s.train_x.end());
        train_y.insert(train_y.end(), s.train_y.begin(), s.train_y.end());
        test_x.insert(test_x.end(), s.test_x.begin(), s.test_x.end());
        test_y.insert(test_y.end(), s.test_y.begin(), s.test_y.end());
    }
    if (train_y.empty()) throw ConfigError("no pooled training data");
    if (test_y.empty()) throw ConfigError("no pooled test data");

    Scaler s = fit_scaler(train_x);
    Matrix zt = transform(s, train_x);
    Matrix ze = transform(s, test_x);

    Rng init(seed_stream(plan.seed, "init"));
    CentralResult res;
    res.model = init_model(plan.model, init);
    res.pooled_train_rows = static_cast<long>(train_y.size());
    if (plan.rounds > 0) {
        AdamState st = make_adam_state(res.model.w);
        res.loss_history = train_epochs(res.model, st, zt, train_y, solo_config(plan));
    }
    res.accuracy = scored_accuracy(res.model, ze, test_y, res.confusion);
    return res;
}

LocalResult run_local(const ExperimentPlan& plan, const std::vector<ClientSplit>& splits) {
    if (plan.variant != IdsVariant::Local)
        throw ConfigError("plan variant is not local");
    if (plan.rounds < 0) throw ConfigError("epoch count cannot be negative");
    LocalResult res;
    std::vector<ClientRecord> kept;
    for (const ClientSplit& split : splits) {
        ClientRecord rec(split);
        if (!rec.has_train_data() || !rec.has_test_data()) {
            res.excluded_ids.push_back(rec.uav_id());
            continue;
        }
        kept.push_back(std::move(rec));
    }
    if (kept.empty()) throw ConfigError("no client had both splits");

    // same evaluation site as the federated variants: every participant
    // hands over its transformed test split and every isolated model is
    // scored against the whole pool, so a model that only fits its own
    // node's traffic pays for it
    Matrix pool_x;
    std::vector<int> pool_y;
    for (const ClientRecord& rec : kept) export_test_split(rec, pool_x, pool_y);

    double acc_sum = 0.0;
    for (const ClientRecord& rec : kept) {
        // every isolated model starts from the same seeded init, so score
        // differences come from the data alone
        Rng init(seed_stream(plan.seed, "init"));
        Model m = init_model(plan.model, init);
        if (plan.rounds > 0) {
            AdamState st = make_adam_state(m.w);
            train_epochs(m, st, rec.train_features(), rec.train_labels(), solo_config(plan));
        }
        ConfusionMatrix cm;
        double acc = scored_accuracy(m, pool_x, pool_y, cm);
        res.client_ids.push_back(rec.uav_id());
        res.models.push_back(std::move(m));
        res.confusions.push_back(cm);
        res.accuracies.push_back(acc);
        acc_sum += acc;
    }
    res.mean_accuracy = acc_sum / static_cast<double>(res.client_ids.size());
    return res;
}

}  // namespace fanet
