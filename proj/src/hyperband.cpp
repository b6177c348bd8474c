#include "fanet/hyperband.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fanet/errors.hpp"
#include "fanet/rng.hpp"
#include "fanet/textio.hpp"

namespace fanet {

namespace {

long pow_long(long base, int exp) {
    long v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

void check_schedule_args(long budget, long eta) {
    if (budget < 1) throw ConfigError("resource budget must be at least 1");
    if (eta < 2) throw ConfigError("halving factor must be at least 2");
}

}  // namespace

int bracket_count(long budget, long eta) {
    check_schedule_args(budget, eta);
    int s = 0;
    long p = 1;
    while (p <= budget / eta) {
        p *= eta;
        ++s;
    }
    return s + 1;
}

std::vector<long> bracket_rung_sizes(long budget, long eta, int bracket) {
    check_schedule_args(budget, eta);
    if (bracket < 0 || bracket >= bracket_count(budget, eta))
        throw ConfigError("bracket index outside the schedule");
    std::vector<long> sizes;
    long n = pow_long(eta, bracket);
    for (int i = 0; i <= bracket; ++i) {
        sizes.push_back(n);
        n /= eta;
    }
    return sizes;
}

std::vector<long> bracket_rung_resources(long budget, long eta, int bracket) {
    check_schedule_args(budget, eta);
    if (bracket < 0 || bracket >= bracket_count(budget, eta))
        throw ConfigError("bracket index outside the schedule");
    std::vector<long> res;
    for (int i = 0; i <= bracket; ++i) {
        long r = budget / pow_long(eta, bracket - i);
        res.push_back(r < 1 ? 1 : r);
    }
    return res;
}

long schedule_total(long budget, long eta) {
    long total = 0;
    int brackets = bracket_count(budget, eta);
    for (int b = 0; b < brackets; ++b) {
        std::vector<long> sizes = bracket_rung_sizes(budget, eta, b);
        std::vector<long> res = bracket_rung_resources(budget, eta, b);
        for (std::size_t i = 0; i < sizes.size(); ++i) total += sizes[i] * res[i];
    }
    return total;
}

std::vector<LedgerRow> successive_halving(const std::vector<TrialConfig>& configs,
                                          const Objective& objective,
                                          const std::vector<long>& rung_resources,
                                          long eta, int bracket_label) {
    if (configs.empty()) throw ConfigError("successive halving needs at least one config");
    if (rung_resources.empty()) throw ConfigError("successive halving needs at least one rung");
    if (eta < 2) throw ConfigError("halving factor must be at least 2");
    for (long r : rung_resources)
        if (r < 1) throw ConfigError("rung resource must be positive");

    auto by_sample = [](const TrialConfig& a, const TrialConfig& b) {
        return a.sample_index < b.sample_index;
    };
    std::vector<TrialConfig> current = configs;
    std::sort(current.begin(), current.end(), by_sample);

    std::vector<LedgerRow> rows;
    for (std::size_t k = 0; k < rung_resources.size() && !current.empty(); ++k) {
        long res = rung_resources[k];
        struct Scored {
            TrialConfig cfg;
            double score;
        };
        std::vector<Scored> finite;
        for (const TrialConfig& c : current) {
            double s = objective(c, res);
            bool ok = std::isfinite(s);
            rows.push_back({bracket_label, static_cast<int>(k), c.sample_index,
                            c.learning_rate, c.batch_size, res, s, !ok});
            if (ok) finite.push_back({c, s});
        }
        if (k + 1 == rung_resources.size()) break;
        // a field too small to split still sends its leader forward
        std::size_t keep = current.size() / static_cast<std::size_t>(eta);
        if (keep == 0) keep = 1;
        std::sort(finite.begin(), finite.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.cfg.sample_index < b.cfg.sample_index;
        });
        if (keep > finite.size()) keep = finite.size();
        current.clear();
        for (std::size_t i = 0; i < keep; ++i) current.push_back(finite[i].cfg);
        std::sort(current.begin(), current.end(), by_sample);
    }
    return rows;
}

HyperbandResult run_hyperband(const SearchSpace& space, const Objective& objective,
                              long budget, long eta, std::uint64_t seed) {
    check_schedule_args(budget, eta);
    if (!(space.learning_rate_lo > 0.0) ||
        !(space.learning_rate_hi >= space.learning_rate_lo))
        throw ConfigError("learning rate range must satisfy 0 < lo <= hi");
    if (space.batch_size < 1) throw ConfigError("batch size must be positive");

    HyperbandResult out;
    out.brackets = bracket_count(budget, eta);
    out.scheduled_resource = schedule_total(budget, eta);

    Rng rng(seed_stream(seed, "sample"));
    double llo = std::log(space.learning_rate_lo);
    double lhi = std::log(space.learning_rate_hi);
    int counter = 0;
    bool full_schedule = true;

    for (int b = out.brackets - 1; b >= 0; --b) {
        std::vector<long> sizes = bracket_rung_sizes(budget, eta, b);
        std::vector<long> res = bracket_rung_resources(budget, eta, b);
        std::vector<TrialConfig> cfgs;
        for (long i = 0; i < sizes[0]; ++i) {
            TrialConfig c;
            c.sample_index = counter++;
            double lr = std::exp(rng.uniform(llo, lhi));
            c.learning_rate =
                std::clamp(lr, space.learning_rate_lo, space.learning_rate_hi);
            c.batch_size = space.batch_size;
            cfgs.push_back(c);
        }
        std::vector<LedgerRow> rows = successive_halving(cfgs, objective, res, eta, b);
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            long achieved = 0;
            for (const LedgerRow& row : rows)
                if (row.rung == static_cast<int>(k)) ++achieved;
            if (achieved != sizes[k]) full_schedule = false;
        }
        out.ledger.insert(out.ledger.end(), rows.begin(), rows.end());
    }

    for (const LedgerRow& row : out.ledger) out.total_resource += row.resource;
    if (full_schedule && out.total_resource != out.scheduled_resource)
        throw InternalError("budget accounting drifted from the schedule");

    bool found = false;
    const LedgerRow* best = nullptr;
    for (const LedgerRow& row : out.ledger) {
        if (row.disqualified || row.resource != budget) continue;
        if (!found || row.score > best->score ||
            (row.score == best->score && row.sample_index < best->sample_index)) {
            best = &row;
            found = true;
        }
    }
    if (!found) throw ConfigError("no trial survived to the full resource");
    out.best.sample_index = best->sample_index;
    out.best.learning_rate = best->learning_rate;
    out.best.batch_size = best->batch_size;
    out.best_score = best->score;
    return out;
}

void write_ledger_csv(const std::string& path, const std::vector<LedgerRow>& ledger) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write ledger: " + path);
    out << "sample_index,learning_rate,batch_size,bracket,rung,resource,score,"
           "disqualified\n";
    for (const LedgerRow& r : ledger) {
        out << r.sample_index << ',' << format_csv_value(r.learning_rate) << ','
            << r.batch_size << ',' << r.bracket << ',' << r.rung << ',' << r.resource
            << ',';
        if (r.disqualified)
            out << "na";
        else
            out << format_csv_value(r.score);
        out << ',' << (r.disqualified ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("short write on ledger: " + path);
}

Objective make_validation_objective(const ExperimentPlan& plan,
                                    const std::vector<ClientSplit>& splits) {
    // carve a fixed stratified 20% of each client's training rows into a
    // validation set shared by every trial; real test rows stay untouched
    std::vector<ClientSplit> carved;
    for (const ClientSplit& s : splits) {
        ClientSplit v;
        v.uav_id = s.uav_id;
        std::vector<std::size_t> byclass[2];
        for (std::size_t i = 0; i < s.train_y.size(); ++i) {
            int label = s.train_y[i];
            if (label != 0 && label != 1)
                throw InternalError("training label outside {0,1}");
            byclass[label].push_back(i);
        }
        Rng rng(seed_stream(plan.seed, "holdout", static_cast<std::uint64_t>(s.uav_id)));
        for (auto& cls : byclass) {
            rng.shuffle(cls);
            std::size_t keep = cls.size() * 8 / 10;
            for (std::size_t i = 0; i < cls.size(); ++i) {
                if (i < keep) {
                    v.train_x.push_back(s.train_x[cls[i]]);
                    v.train_y.push_back(s.train_y[cls[i]]);
                } else {
                    v.test_x.push_back(s.train_x[cls[i]]);
                    v.test_y.push_back(s.train_y[cls[i]]);
                }
            }
        }
        carved.push_back(std::move(v));
    }
    return [plan, carved](const TrialConfig& cfg, long resource) -> double {
        ExperimentPlan p = plan;
        p.learning_rate = cfg.learning_rate;
        p.batch_size = cfg.batch_size;
        p.rounds = static_cast<int>(resource);
        switch (p.variant) {
            case IdsVariant::Centralized:
                return run_centralized(p, carved).accuracy;
            case IdsVariant::Local:
                return run_local(p, carved).mean_accuracy;
            case IdsVariant::Federated:
            case IdsVariant::FewShot:
                return run_federated(p, carved).accuracy;
        }
        throw InternalError("unknown experiment variant");
    };
}

}  // namespace fanet
