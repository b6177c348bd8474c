#include "fanet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fanet/errors.hpp"
#include "fanet/textio.hpp"

namespace fanet {

namespace {

// CNN stage sizes for the 31-wide input
constexpr int kConvFilters = 9;
constexpr int kKernel = 3;
constexpr int kConvOut = kFeatureCount - kKernel + 1;  // 29
constexpr int kPoolOut = kConvOut / 2;                 // 14, valid pooling
constexpr int kFlat = kConvFilters * kPoolOut;         // 126
constexpr int kDenseUnits = 6;
constexpr int kHidden = 10;

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double clamp_prob(double p) {
    return std::min(1.0 - kBceEpsilon, std::max(kBceEpsilon, p));
}

double sample_loss(double p, int y) {
    if (y != 0 && y != 1) throw InternalError("labels must be 0 or 1");
    double q = clamp_prob(p);
    return y ? -std::log(q) : -std::log(1.0 - q);
}

// zero when the clamp is active: the loss is flat there
double dloss_dlogit(double p, int y) {
    if (p <= kBceEpsilon || p >= 1.0 - kBceEpsilon) return 0.0;
    return p - static_cast<double>(y);
}

struct MlpCache {
    std::array<double, kHidden> h1{}, a1{}, h2{}, a2{};
    double z = 0.0, p = 0.0;
};

struct CnnCache {
    std::array<std::array<double, kConvOut>, kConvFilters> pre{}, act{};
    std::array<std::array<double, kPoolOut>, kConvFilters> pooled{};
    std::array<std::array<int, kPoolOut>, kConvFilters> arg{};
    std::array<std::array<double, kPoolOut>, kConvFilters> mask{};
    std::array<double, kFlat> flat{};
    std::array<double, kDenseUnits> h1{}, a1{};
    double z = 0.0, p = 0.0;
};

void mlp_forward(const WeightSet& w, const FeatureRow& x, MlpCache& c) {
    const auto& w1 = w.tensors[0];
    const auto& b1 = w.tensors[1];
    const auto& w2 = w.tensors[2];
    const auto& b2 = w.tensors[3];
    const auto& w3 = w.tensors[4];
    const auto& b3 = w.tensors[5];
    for (int u = 0; u < kHidden; ++u) {
        double s = b1[static_cast<std::size_t>(u)];
        for (int i = 0; i < kFeatureCount; ++i)
            s += w1[static_cast<std::size_t>(u * kFeatureCount + i)] *
                 x[static_cast<std::size_t>(i)];
        c.h1[static_cast<std::size_t>(u)] = s;
        c.a1[static_cast<std::size_t>(u)] = s > 0.0 ? s : 0.0;
    }
    for (int u = 0; u < kHidden; ++u) {
        double s = b2[static_cast<std::size_t>(u)];
        for (int i = 0; i < kHidden; ++i)
            s += w2[static_cast<std::size_t>(u * kHidden + i)] * c.a1[static_cast<std::size_t>(i)];
        c.h2[static_cast<std::size_t>(u)] = s;
        c.a2[static_cast<std::size_t>(u)] = s > 0.0 ? s : 0.0;
    }
    double z = b3[0];
    for (int i = 0; i < kHidden; ++i)
        z += w3[static_cast<std::size_t>(i)] * c.a2[static_cast<std::size_t>(i)];
    c.z = z;
    c.p = sigmoid(z);
}

void mlp_backward(const WeightSet& w, const FeatureRow& x, const MlpCache& c, double dz,
                  WeightSet& g) {
    const auto& w2 = w.tensors[2];
    const auto& w3 = w.tensors[4];
    auto& gw1 = g.tensors[0];
    auto& gb1 = g.tensors[1];
    auto& gw2 = g.tensors[2];
    auto& gb2 = g.tensors[3];
    auto& gw3 = g.tensors[4];
    auto& gb3 = g.tensors[5];
    gb3[0] += dz;
    std::array<double, kHidden> dh2{};
    for (int u = 0; u < kHidden; ++u) {
        gw3[static_cast<std::size_t>(u)] += dz * c.a2[static_cast<std::size_t>(u)];
        double da = dz * w3[static_cast<std::size_t>(u)];
        dh2[static_cast<std::size_t>(u)] = c.h2[static_cast<std::size_t>(u)] > 0.0 ? da : 0.0;
    }
    std::array<double, kHidden> dh1{};
    for (int u = 0; u < kHidden; ++u) {
        double d = dh2[static_cast<std::size_t>(u)];
        gb2[static_cast<std::size_t>(u)] += d;
        for (int i = 0; i < kHidden; ++i) {
            gw2[static_cast<std::size_t>(u * kHidden + i)] += d * c.a1[static_cast<std::size_t>(i)];
            dh1[static_cast<std::size_t>(i)] += d * w2[static_cast<std::size_t>(u * kHidden + i)];
        }
    }
    for (int u = 0; u < kHidden; ++u) {
        double d = c.h1[static_cast<std::size_t>(u)] > 0.0 ? dh1[static_cast<std::size_t>(u)] : 0.0;
        gb1[static_cast<std::size_t>(u)] += d;
        for (int i = 0; i < kFeatureCount; ++i)
            gw1[static_cast<std::size_t>(u * kFeatureCount + i)] += d * x[static_cast<std::size_t>(i)];
    }
}

// one dropout mask draw per pooled unit, filter-major, whenever enabled
void cnn_forward(const WeightSet& w, const FeatureRow& x, bool dropout_enabled, Rng* rng,
                 CnnCache& c) {
    const auto& wc = w.tensors[0];
    const auto& bc = w.tensors[1];
    const auto& wd = w.tensors[2];
    const auto& bd = w.tensors[3];
    const auto& wo = w.tensors[4];
    const auto& bo = w.tensors[5];
    for (int f = 0; f < kConvFilters; ++f) {
        for (int t = 0; t < kConvOut; ++t) {
            double s = bc[static_cast<std::size_t>(f)];
            for (int k = 0; k < kKernel; ++k)
                s += wc[static_cast<std::size_t>(f * kKernel + k)] *
                     x[static_cast<std::size_t>(t + k)];
            c.pre[static_cast<std::size_t>(f)][static_cast<std::size_t>(t)] = s;
            c.act[static_cast<std::size_t>(f)][static_cast<std::size_t>(t)] = s > 0.0 ? s : 0.0;
        }
        for (int j = 0; j < kPoolOut; ++j) {
            int lo = 2 * j;
            double va = c.act[static_cast<std::size_t>(f)][static_cast<std::size_t>(lo)];
            double vb = c.act[static_cast<std::size_t>(f)][static_cast<std::size_t>(lo + 1)];
            int pick = vb > va ? lo + 1 : lo;  // ties keep the earlier slot
            c.arg[static_cast<std::size_t>(f)][static_cast<std::size_t>(j)] = pick;
            c.pooled[static_cast<std::size_t>(f)][static_cast<std::size_t>(j)] =
                c.act[static_cast<std::size_t>(f)][static_cast<std::size_t>(pick)];
        }
    }
    const double keep = 1.0 - kDropoutRate;
    for (int f = 0; f < kConvFilters; ++f)
        for (int j = 0; j < kPoolOut; ++j) {
            double m = 1.0;
            if (dropout_enabled) {
                if (rng == nullptr)
                    throw InternalError("dropout requested without a random stream");
                m = rng->uniform01() < keep ? 1.0 / keep : 0.0;  // inverted scaling
            }
            c.mask[static_cast<std::size_t>(f)][static_cast<std::size_t>(j)] = m;
            c.flat[static_cast<std::size_t>(f * kPoolOut + j)] =
                c.pooled[static_cast<std::size_t>(f)][static_cast<std::size_t>(j)] * m;
        }
    for (int u = 0; u < kDenseUnits; ++u) {
        double s = bd[static_cast<std::size_t>(u)];
        for (int i = 0; i < kFlat; ++i)
            s += wd[static_cast<std::size_t>(u * kFlat + i)] * c.flat[static_cast<std::size_t>(i)];
        c.h1[static_cast<std::size_t>(u)] = s;
        c.a1[static_cast<std::size_t>(u)] = s > 0.0 ? s : 0.0;
    }
    double z = bo[0];
    for (int u = 0; u < kDenseUnits; ++u)
        z += wo[static_cast<std::size_t>(u)] * c.a1[static_cast<std::size_t>(u)];
    c.z = z;
    c.p = sigmoid(z);
}

void cnn_backward(const WeightSet& w, const FeatureRow& x, const CnnCache& c, double dz,
                  WeightSet& g) {
    const auto& wd = w.tensors[2];
    const auto& wo = w.tensors[4];
    auto& gwc = g.tensors[0];
    auto& gbc = g.tensors[1];
    auto& gwd = g.tensors[2];
    auto& gbd = g.tensors[3];
    auto& gwo = g.tensors[4];
    auto& gbo = g.tensors[5];
    gbo[0] += dz;
    std::array<double, kDenseUnits> dh1{};
    for (int u = 0; u < kDenseUnits; ++u) {
        gwo[static_cast<std::size_t>(u)] += dz * c.a1[static_cast<std::size_t>(u)];
        double da = dz * wo[static_cast<std::size_t>(u)];
        dh1[static_cast<std::size_t>(u)] = c.h1[static_cast<std::size_t>(u)] > 0.0 ? da : 0.0;
    }
    std::array<double, kFlat> dflat{};
    for (int u = 0; u < kDenseUnits; ++u) {
        double d = dh1[static_cast<std::size_t>(u)];
        gbd[static_cast<std::size_t>(u)] += d;
        for (int i = 0; i < kFlat; ++i) {
            gwd[static_cast<std::size_t>(u * kFlat + i)] += d * c.flat[static_cast<std::size_t>(i)];
            dflat[static_cast<std::size_t>(i)] += d * wd[static_cast<std::size_t>(u * kFlat + i)];
        }
    }
    std::array<std::array<double, kConvOut>, kConvFilters> dpre{};
    for (int f = 0; f < kConvFilters; ++f)
        for (int j = 0; j < kPoolOut; ++j) {
            double d = dflat[static_cast<std::size_t>(f * kPoolOut + j)] *
                       c.mask[static_cast<std::size_t>(f)][static_cast<std::size_t>(j)];
            int t = c.arg[static_cast<std::size_t>(f)][static_cast<std::size_t>(j)];
            if (c.pre[static_cast<std::size_t>(f)][static_cast<std::size_t>(t)] > 0.0)
                dpre[static_cast<std::size_t>(f)][static_cast<std::size_t>(t)] += d;
        }
    for (int f = 0; f < kConvFilters; ++f) {
        double db = 0.0;
        for (int t = 0; t < kConvOut; ++t) {
            double d = dpre[static_cast<std::size_t>(f)][static_cast<std::size_t>(t)];
            if (d == 0.0) continue;
            db += d;
            for (int k = 0; k < kKernel; ++k)
                gwc[static_cast<std::size_t>(f * kKernel + k)] += d * x[static_cast<std::size_t>(t + k)];
        }
        gbc[static_cast<std::size_t>(f)] += db;
    }
}

}  // namespace

const char* to_string(ArchKind k) { return k == ArchKind::Mlp ? "dnn" : "cnn"; }

ArchKind arch_kind_from_string(const std::string& s) {
    if (s == "dnn" || s == "mlp") return ArchKind::Mlp;
    if (s == "cnn") return ArchKind::Cnn;
    throw ConfigError("unknown model architecture '" + s + "' (expected dnn or cnn)");
}

long WeightSet::param_count() const {
    long n = 0;
    for (const auto& t : tensors) n += static_cast<long>(t.size());
    return n;
}

bool WeightSet::same_shape(const WeightSet& other) const {
    if (tensors.size() != other.tensors.size()) return false;
    for (std::size_t i = 0; i < tensors.size(); ++i)
        if (tensors[i].size() != other.tensors[i].size()) return false;
    return true;
}

bool WeightSet::all_finite() const {
    for (const auto& t : tensors)
        for (double v : t)
            if (!std::isfinite(v)) return false;
    return true;
}

std::vector<std::vector<int>> arch_shapes(ArchKind kind) {
    if (kind == ArchKind::Mlp)
        return {{kHidden, kFeatureCount}, {kHidden}, {kHidden, kHidden},
                {kHidden},               {1, kHidden}, {1}};
    return {{kConvFilters, kKernel}, {kConvFilters}, {kDenseUnits, kFlat},
            {kDenseUnits},           {1, kDenseUnits}, {1}};
}

long arch_param_count(ArchKind kind) {
    long n = 0;
    for (const auto& shape : arch_shapes(kind)) {
        long t = 1;
        for (int d : shape) t *= d;
        n += t;
    }
    return n;
}

Model init_model(ArchKind kind, Rng& rng) {
    Model m;
    m.kind = kind;
    for (const auto& shape : arch_shapes(kind)) {
        long count = 1;
        for (int d : shape) count *= d;
        std::vector<double> t(static_cast<std::size_t>(count), 0.0);
        if (shape.size() == 2) {  // weight matrices; biases stay zero
            double limit = std::sqrt(6.0 / shape[1]);
            for (double& v : t) v = rng.uniform(-limit, limit);
        }
        m.w.tensors.push_back(std::move(t));
    }
    return m;
}

WeightSet zeros_like(const WeightSet& w) {
    WeightSet z;
    for (const auto& t : w.tensors) z.tensors.emplace_back(t.size(), 0.0);
    return z;
}

Scaler fit_scaler(const Matrix& x) {
    if (x.empty()) throw ConfigError("cannot fit a scaler on an empty matrix");
    Scaler s;
    const double n = static_cast<double>(x.size());
    for (const FeatureRow& row : x)
        for (int i = 0; i < kFeatureCount; ++i) s.mean[static_cast<std::size_t>(i)] += row[static_cast<std::size_t>(i)];
    for (int i = 0; i < kFeatureCount; ++i) s.mean[static_cast<std::size_t>(i)] /= n;
    for (const FeatureRow& row : x)
        for (int i = 0; i < kFeatureCount; ++i) {
            double d = row[static_cast<std::size_t>(i)] - s.mean[static_cast<std::size_t>(i)];
            s.std[static_cast<std::size_t>(i)] += d * d;
        }
    for (int i = 0; i < kFeatureCount; ++i) {
        double v = std::sqrt(s.std[static_cast<std::size_t>(i)] / n);  // population std
        s.std[static_cast<std::size_t>(i)] = v < 1e-12 ? 1.0 : v;     // constant column
    }
    return s;
}

Matrix transform(const Scaler& s, const Matrix& x) {
    Matrix out = x;
    for (FeatureRow& row : out)
        for (int i = 0; i < kFeatureCount; ++i)
            row[static_cast<std::size_t>(i)] =
                (row[static_cast<std::size_t>(i)] - s.mean[static_cast<std::size_t>(i)]) /
                s.std[static_cast<std::size_t>(i)];
    return out;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> forward(const Model& m, const Matrix& x, bool dropout_enabled, Rng* rng) {
    std::vector<double> out;
    out.reserve(x.size());
    if (m.kind == ArchKind::Mlp) {
        MlpCache c;
        for (const FeatureRow& row : x) {
            mlp_forward(m.w, row, c);
            out.push_back(c.p);
        }
    } else {
        CnnCache c;
        for (const FeatureRow& row : x) {
            cnn_forward(m.w, row, dropout_enabled, rng, c);
            out.push_back(c.p);
        }
    }
    return out;
}

double grad_batch(const Model& m, const Matrix& x, const std::vector<int>& y, WeightSet& grads,
                  bool dropout_enabled, Rng* rng) {
    if (x.empty() || x.size() != y.size())
        throw InternalError("gradient batch needs matching nonempty inputs and labels");
    grads = zeros_like(m.w);
    double loss = 0.0;
    const double inv = 1.0 / static_cast<double>(x.size());
    if (m.kind == ArchKind::Mlp) {
        MlpCache c;
        for (std::size_t r = 0; r < x.size(); ++r) {
            mlp_forward(m.w, x[r], c);
            loss += sample_loss(c.p, y[r]);
            double dz = dloss_dlogit(c.p, y[r]) * inv;
            if (dz != 0.0) mlp_backward(m.w, x[r], c, dz, grads);
        }
    } else {
        CnnCache c;
        for (std::size_t r = 0; r < x.size(); ++r) {
            cnn_forward(m.w, x[r], dropout_enabled, rng, c);
            loss += sample_loss(c.p, y[r]);
            double dz = dloss_dlogit(c.p, y[r]) * inv;
            if (dz != 0.0) cnn_backward(m.w, x[r], c, dz, grads);
        }
    }
    return loss * inv;
}

double eval_loss(const Model& m, const Matrix& x, const std::vector<int>& y) {
    if (x.empty() || x.size() != y.size())
        throw InternalError("loss evaluation needs matching nonempty inputs and labels");
    std::vector<double> p = forward(m, x, false, nullptr);
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) loss += sample_loss(p[i], y[i]);
    return loss / static_cast<double>(p.size());
}

AdamState make_adam_state(const WeightSet& w) {
    AdamState s;
    for (const auto& t : w.tensors) {
        s.m.emplace_back(t.size(), 0.0);
        s.v.emplace_back(t.size(), 0.0);
    }
    return s;
}

void adam_step(WeightSet& w, const WeightSet& grads, AdamState& state, double lr) {
    if (!w.same_shape(grads)) throw InternalError("gradient shape mismatch in adam step");
    if (!grads.all_finite()) throw InternalError("non-finite gradient in adam step");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
    for (std::size_t ti = 0; ti < w.tensors.size(); ++ti) {
        auto& wt = w.tensors[ti];
        const auto& gt = grads.tensors[ti];
        auto& mt = state.m[ti];
        auto& vt = state.v[ti];
        for (std::size_t i = 0; i < wt.size(); ++i) {
            mt[i] = kAdamBeta1 * mt[i] + (1.0 - kAdamBeta1) * gt[i];
            vt[i] = kAdamBeta2 * vt[i] + (1.0 - kAdamBeta2) * gt[i] * gt[i];
            double mhat = mt[i] / bc1;
            double vhat = vt[i] / bc2;
            wt[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
        }
    }
}

std::vector<double> train_epochs(Model& m, AdamState& state, const Matrix& x,
                                 const std::vector<int>& y, const TrainConfig& cfg) {
    if (x.empty() || x.size() != y.size())
        throw ConfigError("training needs matching nonempty inputs and labels");
    if (cfg.batch_size < 1) throw ConfigError("batch size must be at least 1");
    std::vector<double> history;
    const std::size_t n = x.size();
    for (int e = 0; e < cfg.epochs; ++e) {
        Rng rng(seed_stream(cfg.seed, "epoch",
                            cfg.first_epoch_index + static_cast<long>(e)));
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(order);
        double loss_sum = 0.0;
        WeightSet grads;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            Matrix bx;
            std::vector<int> by;
            for (std::size_t i = start; i < end; ++i) {
                bx.push_back(x[order[i]]);
                by.push_back(y[order[i]]);
            }
            double batch_loss = grad_batch(m, bx, by, grads, cfg.dropout_enabled, &rng);
            loss_sum += batch_loss * static_cast<double>(bx.size());
            adam_step(m.w, grads, state, cfg.learning_rate);
        }
        history.push_back(loss_sum / static_cast<double>(n));
    }
    return history;
}

std::vector<double> embed(const Model& m, const FeatureRow& x) {
    if (m.kind == ArchKind::Mlp) {
        MlpCache c;
        mlp_forward(m.w, x, c);
        return std::vector<double>(c.a2.begin(), c.a2.end());
    }
    CnnCache c;
    cnn_forward(m.w, x, false, nullptr, c);
    return std::vector<double>(c.a1.begin(), c.a1.end());
}

double pairwise_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw InternalError("embedding dimensions differ: " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

double pair_probability(const FcHead& head, double distance) {
    return sigmoid(head.w * distance + head.b);
}

double pair_probability(const Model& body, const FcHead& head, const FeatureRow& xi,
                        const FeatureRow& xj) {
    return pair_probability(head, pairwise_distance(embed(body, xi), embed(body, xj)));
}

void save_weights(const Model& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << to_string(m.kind) << ' ' << m.w.param_count() << '\n';
    for (const auto& t : m.w.tensors) {
        out << t.size();
        for (double v : t) out << ' ' << format_double(v);
        out << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

Model load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string kind_str;
    long params = 0;
    if (!(in >> kind_str >> params)) throw ConfigError(path + ": bad checkpoint header");
    Model m;
    m.kind = arch_kind_from_string(kind_str);
    auto shapes = arch_shapes(m.kind);
    if (params != arch_param_count(m.kind))
        throw ConfigError(path + ": parameter count does not match the architecture");
    for (const auto& shape : shapes) {
        long count = 1;
        for (int d : shape) count *= d;
        std::size_t stored = 0;
        if (!(in >> stored) || stored != static_cast<std::size_t>(count))
            throw ConfigError(path + ": tensor size mismatch");
        std::vector<double> t;
        t.reserve(stored);
        std::string tok;
        for (std::size_t i = 0; i < stored; ++i) {
            if (!(in >> tok)) throw ConfigError(path + ": truncated checkpoint");
            t.push_back(parse_double(tok));
        }
        m.w.tensors.push_back(std::move(t));
    }
    return m;
}

}  // namespace fanet
