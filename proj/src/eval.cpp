#include "fanet/eval.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fanet/errors.hpp"
#include "fanet/nn.hpp"
#include "fanet/textio.hpp"

namespace fanet {

ConfusionMatrix confusion_at_half(const std::vector<double>& probs,
                                  const std::vector<int>& labels) {
    if (probs.size() != labels.size())
        throw InternalError("prediction and label counts differ");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        int y = labels[i];
        if (y != 0 && y != 1) throw InternalError("labels must be 0 or 1");
        bool pred = probs[i] >= 0.5;
        if (pred && y == 1)
            ++cm.tp;
        else if (pred)
            ++cm.fp;
        else if (y == 1)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

MetricSet metrics(const ConfusionMatrix& cm) {
    if (cm.tp < 0 || cm.fp < 0 || cm.tn < 0 || cm.fn < 0)
        throw InternalError("negative confusion counts");
    long total = cm.total();
    if (total == 0) throw InternalError("empty confusion matrix");
    MetricSet out;
    out.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
    if (cm.tp + cm.fn > 0) {
        out.detection_rate.value =
            static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
        out.detection_rate.applicable = true;
    }
    if (cm.fp + cm.tn > 0) {
        out.false_positive_rate.value =
            static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
        out.false_positive_rate.applicable = true;
    }
    return out;
}

std::uint64_t comm_cost(std::uint64_t nodes, std::uint64_t weights_per_model,
                        std::uint64_t rounds, std::uint64_t bytes_per_weight) {
    if (nodes == 0 || weights_per_model == 0 || rounds == 0 || bytes_per_weight == 0)
        throw ConfigError("communication cost factors must all be positive");
    return nodes * weights_per_model * rounds * bytes_per_weight;
}

namespace {

// variants that never ship weights record zero for every exchange factor
bool exchanges_models(const ExperimentRecord& r) {
    return r.nodes != 0 || r.comm_rounds != 0 || r.bytes_per_weight != 0;
}

void validate_record(const ExperimentRecord& r) {
    if (r.attack.empty()) throw InternalError("record lacks an attack name");
    ArchKind kind = arch_kind_from_string(r.model);
    if (r.weights_per_model != static_cast<long>(arch_param_count(kind)))
        throw InternalError("reported weight count disagrees with the model " + r.model);
    if (exchanges_models(r) &&
        (r.nodes <= 0 || r.comm_rounds <= 0 || r.bytes_per_weight <= 0))
        throw InternalError("communication inputs must all be positive or all zero");
    if (r.wall_seconds < 0.0) throw InternalError("negative wall time");
    (void)metrics(r.cm);
}

std::string cost_or_na(const ExperimentRecord& r) {
    if (!exchanges_models(r)) return "na";
    return std::to_string(comm_cost(static_cast<std::uint64_t>(r.nodes),
                                    static_cast<std::uint64_t>(r.weights_per_model),
                                    static_cast<std::uint64_t>(r.comm_rounds),
                                    static_cast<std::uint64_t>(r.bytes_per_weight)));
}

// everything but the seed and the outcome; rows sharing this key are the
// same setting run under different seeds
std::string plan_key(const ExperimentRecord& r) {
    std::ostringstream k;
    k << r.attack << '|' << format_double(r.attacker_ratio) << '|' << r.topologies
      << '|' << r.variant << '|' << r.model << '|' << r.shot << '|' << r.rounds << '|'
      << format_double(r.learning_rate) << '|' << r.batch_size;
    return k.str();
}

struct Group {
    std::string key;
    std::vector<std::size_t> rows;
};

std::vector<Group> group_records(const std::vector<ExperimentRecord>& records) {
    std::vector<Group> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::string key = plan_key(records[i]);
        Group* g = nullptr;
        for (Group& cand : groups)
            if (cand.key == key) {
                g = &cand;
                break;
            }
        if (!g) {
            groups.push_back({key, {}});
            g = &groups.back();
        }
        g->rows.push_back(i);
    }
    return groups;
}

struct RateStats {
    bool any = false;
    double mean = 0.0;
    double sd = 0.0;
};

RateStats rate_stats(const std::vector<double>& values) {
    RateStats out;
    if (values.empty()) return out;
    out.any = true;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size()));
    return out;
}

struct GroupStats {
    RateStats accuracy;
    RateStats dr;
    RateStats fpr;
    double mean_wall = 0.0;
    double mean_tp = 0.0, mean_fp = 0.0, mean_tn = 0.0, mean_fn = 0.0;
};

GroupStats group_stats(const std::vector<ExperimentRecord>& records,
                       const std::vector<std::size_t>& rows) {
    GroupStats out;
    std::vector<double> accs, drs, fprs;
    for (std::size_t i : rows) {
        const ExperimentRecord& r = records[i];
        MetricSet m = metrics(r.cm);
        accs.push_back(m.accuracy);
        if (m.detection_rate.applicable) drs.push_back(m.detection_rate.value);
        if (m.false_positive_rate.applicable) fprs.push_back(m.false_positive_rate.value);
        out.mean_wall += r.wall_seconds;
        out.mean_tp += static_cast<double>(r.cm.tp);
        out.mean_fp += static_cast<double>(r.cm.fp);
        out.mean_tn += static_cast<double>(r.cm.tn);
        out.mean_fn += static_cast<double>(r.cm.fn);
    }
    double n = static_cast<double>(rows.size());
    out.mean_wall /= n;
    out.mean_tp /= n;
    out.mean_fp /= n;
    out.mean_tn /= n;
    out.mean_fn /= n;
    out.accuracy = rate_stats(accs);
    out.dr = rate_stats(drs);
    out.fpr = rate_stats(fprs);
    return out;
}

std::string rate_cell(const Rate& r) {
    return r.applicable ? format_csv_value(r.value) : "na";
}

std::string stat_cell(const RateStats& s, bool want_sd) {
    if (!s.any) return "na";
    return format_csv_value(want_sd ? s.sd : s.mean);
}

std::string percent_or_na(const RateStats& s) {
    return s.any ? format_percent(s.mean) : "na";
}

}  // namespace

void write_report_csv(const std::string& path,
                      const std::vector<ExperimentRecord>& records) {
    if (records.empty()) throw ConfigError("nothing to report");
    for (const ExperimentRecord& r : records) validate_record(r);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write report: " + path);
    out << "attack,attacker_ratio,topologies,variant,model,shot,rounds,learning_rate,"
           "batch_size,seed,tp,fp,tn,fn,accuracy,detection_rate,false_positive_rate,"
           "accuracy_sd,detection_rate_sd,false_positive_rate_sd,nodes,"
           "weights_per_model,comm_rounds,bytes_per_weight,comm_cost,wall_seconds\n";

    auto plan_cells = [&out](const ExperimentRecord& r) {
        out << r.attack << ',' << format_csv_value(r.attacker_ratio) << ','
            << r.topologies << ',' << r.variant << ',' << r.model << ',' << r.shot
            << ',' << r.rounds << ',' << format_csv_value(r.learning_rate) << ','
            << r.batch_size << ',';
    };
    auto cost_cells = [&out](const ExperimentRecord& r) {
        out << r.nodes << ',' << r.weights_per_model << ',' << r.comm_rounds << ','
            << r.bytes_per_weight << ',' << cost_or_na(r) << ',';
    };

    for (const Group& g : group_records(records)) {
        for (std::size_t i : g.rows) {
            const ExperimentRecord& r = records[i];
            MetricSet m = metrics(r.cm);
            plan_cells(r);
            out << r.seed << ',' << r.cm.tp << ',' << r.cm.fp << ',' << r.cm.tn << ','
                << r.cm.fn << ',' << format_csv_value(m.accuracy) << ','
                << rate_cell(m.detection_rate) << ',' << rate_cell(m.false_positive_rate)
                << ",na,na,na,";
            cost_cells(r);
            out << format_csv_value(r.wall_seconds) << '\n';
        }
        if (g.rows.size() < 2) continue;
        const ExperimentRecord& first = records[g.rows.front()];
        GroupStats s = group_stats(records, g.rows);
        plan_cells(first);
        out << "mean," << format_csv_value(s.mean_tp) << ','
            << format_csv_value(s.mean_fp) << ',' << format_csv_value(s.mean_tn) << ','
            << format_csv_value(s.mean_fn) << ',' << stat_cell(s.accuracy, false) << ','
            << stat_cell(s.dr, false) << ',' << stat_cell(s.fpr, false) << ','
            << stat_cell(s.accuracy, true) << ',' << stat_cell(s.dr, true) << ','
            << stat_cell(s.fpr, true) << ',';
        cost_cells(first);
        out << format_csv_value(s.mean_wall) << '\n';
    }
    if (!out) throw IoError("short write on report: " + path);
}

void write_summary_text(const std::string& path,
                        const std::vector<ExperimentRecord>& records) {
    if (records.empty()) throw ConfigError("nothing to report");
    for (const ExperimentRecord& r : records) validate_record(r);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write summary: " + path);
    std::vector<Group> groups = group_records(records);
    out << "experiment summary: " << records.size() << " runs across " << groups.size()
        << " settings\n\n";

    for (const Group& g : groups) {
        const ExperimentRecord& first = records[g.rows.front()];
        GroupStats s = group_stats(records, g.rows);
        out << first.attack << " ratio " << format_percent(first.attacker_ratio)
            << " topologies " << first.topologies << " " << first.variant << " "
            << first.model << " shot " << first.shot << " rounds " << first.rounds
            << " lr " << format_double(first.learning_rate) << " batch "
            << first.batch_size << '\n';
        out << "  seeds " << g.rows.size() << " | accuracy " << percent_or_na(s.accuracy);
        if (g.rows.size() >= 2 && s.accuracy.any)
            out << " (sd " << format_percent(s.accuracy.sd) << ")";
        out << " | DR " << percent_or_na(s.dr) << " | FPR " << percent_or_na(s.fpr)
            << '\n';
        if (exchanges_models(first))
            out << "  comm cost " << first.nodes << " nodes x "
                << first.weights_per_model << " weights x " << first.comm_rounds
                << " rounds x " << first.bytes_per_weight << " bytes = "
                << cost_or_na(first) << " bytes";
        else
            out << "  comm cost na (no model exchange)";
        out << " | wall " << format_fixed(s.mean_wall, 2) << " s\n\n";
    }

    // attack x ratio x model table over the canonical comparison grid
    const char* attacks[3] = {"sinkhole", "blackhole", "flooding"};
    const int ratios[5] = {5, 10, 15, 20, 25};
    const char* models[2] = {"dnn", "cnn"};
    GroupStats cells[3][5][2];
    bool present[3][5][2] = {};
    for (int a = 0; a < 3; ++a)
        for (int p = 0; p < 5; ++p)
            for (int m = 0; m < 2; ++m) {
                std::vector<std::size_t> rows;
                for (std::size_t i = 0; i < records.size(); ++i) {
                    const ExperimentRecord& r = records[i];
                    int pct = static_cast<int>(std::lround(r.attacker_ratio * 100.0));
                    if (r.attack == attacks[a] && pct == ratios[p] && r.model == models[m])
                        rows.push_back(i);
                }
                if (rows.empty()) continue;
                present[a][p][m] = true;
                cells[a][p][m] = group_stats(records, rows);
            }
    bool complete = true;
    for (int a = 0; a < 3; ++a)
        for (int p = 0; p < 5; ++p)
            for (int m = 0; m < 2; ++m)
                if (!present[a][p][m]) complete = false;
    if (complete) {
        out << "model comparison, mean accuracy / DR / FPR per cell\n";
        out << "attack      ratio  dnn                          cnn\n";
        for (int a = 0; a < 3; ++a)
            for (int p = 0; p < 5; ++p) {
                char head[32];
                std::snprintf(head, sizeof(head), "%-11s %3d%%  ", attacks[a],
                              ratios[p]);
                out << head;
                for (int m = 0; m < 2; ++m) {
                    const GroupStats& c = cells[a][p][m];
                    std::string cell = percent_or_na(c.accuracy) + " / " +
                                       percent_or_na(c.dr) + " / " + percent_or_na(c.fpr);
                    if (m == 0)
                        out << cell << std::string(cell.size() < 29 ? 29 - cell.size() : 1, ' ');
                    else
                        out << cell << '\n';
                }
            }
    }
    if (!out) throw IoError("short write on summary: " + path);
}

std::vector<ExperimentRecord> read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read report: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("report is empty: " + path);
    const std::string expected =
        "attack,attacker_ratio,topologies,variant,model,shot,rounds,learning_rate,"
        "batch_size,seed,tp,fp,tn,fn,accuracy,detection_rate,false_positive_rate,"
        "accuracy_sd,detection_rate_sd,false_positive_rate_sd,nodes,"
        "weights_per_model,comm_rounds,bytes_per_weight,comm_cost,wall_seconds";
    if (line != expected) throw ConfigError("unexpected report header in " + path);

    std::vector<ExperimentRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != 26)
            throw ConfigError("report row has " + std::to_string(cells.size()) +
                              " cells instead of 26: " + path);
        if (cells[9] == "mean") continue;
        ExperimentRecord r;
        r.attack = cells[0];
        r.attacker_ratio = parse_double(cells[1]);
        r.topologies = static_cast<int>(parse_int(cells[2]));
        r.variant = cells[3];
        r.model = cells[4];
        r.shot = static_cast<int>(parse_int(cells[5]));
        r.rounds = static_cast<int>(parse_int(cells[6]));
        r.learning_rate = parse_double(cells[7]);
        r.batch_size = static_cast<int>(parse_int(cells[8]));
        r.seed = static_cast<std::uint64_t>(parse_int(cells[9]));
        r.cm.tp = parse_int(cells[10]);
        r.cm.fp = parse_int(cells[11]);
        r.cm.tn = parse_int(cells[12]);
        r.cm.fn = parse_int(cells[13]);
        r.nodes = parse_int(cells[20]);
        r.weights_per_model = parse_int(cells[21]);
        r.comm_rounds = parse_int(cells[22]);
        r.bytes_per_weight = parse_int(cells[23]);
        r.wall_seconds = parse_double(cells[25]);
        validate_record(r);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace fanet
