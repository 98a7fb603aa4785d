#include "smallgain/network.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "smallgain/error.hpp"

namespace smallgain {

Maf Maf::sum() { return Maf(); }

Maf Maf::max() {
    Maf m;
    m.kind_ = Kind::Max;
    return m;
}

Maf Maf::outer_sum(GainExpr rho) {
    Maf m;
    m.kind_ = Kind::OuterSum;
    m.rho_ = std::move(rho);
    return m;
}

Maf Maf::block_max_sum(std::vector<std::vector<std::size_t>> blocks) {
    Maf m;
    m.kind_ = Kind::BlockMaxSum;
    m.blocks_ = std::move(blocks);
    return m;
}

Maf Maf::with_additive_external() const {
    Maf m = *this;
    m.external_additive_ = true;
    return m;
}

double Maf::aggregate(std::span<const double> v, double ext) const {
    switch (kind_) {
        case Kind::Sum: {
            double acc = ext;
            for (double x : v) acc += x;
            return acc;
        }
        case Kind::Max: {
            double acc = ext;
            for (double x : v) acc = std::max(acc, x);
            return acc;
        }
        case Kind::OuterSum: {
            double acc = ext;
            for (double x : v) acc += x;
            return rho_(acc);
        }
        case Kind::BlockMaxSum: {
            const std::size_t n = v.size();
            double acc = 0.0;
            bool ext_listed = false;
            for (const auto& block : blocks_) {
                double m = 0.0;
                for (std::size_t j : block) {
                    if (j == n) {
                        ext_listed = true;
                        m = std::max(m, ext);
                    } else if (j < n) {
                        m = std::max(m, v[j]);
                    }
                }
                acc += m;
            }
            if (!ext_listed) acc += ext;
            return acc;
        }
    }
    return 0.0;
}

double Maf::operator()(std::span<const double> internal, double external) const {
    if (external_additive_) return aggregate(internal, 0.0) + external;
    return aggregate(internal, external);
}

bool operator==(const Maf& a, const Maf& b) {
    return a.kind_ == b.kind_ && a.rho_ == b.rho_ && a.blocks_ == b.blocks_ &&
           a.external_additive_ == b.external_additive_;
}

const char* maf_kind_name(Maf::Kind kind) {
    switch (kind) {
        case Maf::Kind::Sum: return "sum";
        case Maf::Kind::Max: return "max";
        case Maf::Kind::OuterSum: return "outer_sum";
        case Maf::Kind::BlockMaxSum: return "block_max_sum";
    }
    return "?";
}

namespace {

[[noreturn]] void incompatible(std::size_t row, const std::string& what) {
    throw Error(ErrorKind::IncompatibleMaf, "row " + std::to_string(row) + ": " + what);
}

// Structural checks plus a sampled (M1)/(M2) audit restricted to the active
// index set of the row.
void audit_row(std::size_t row, const Maf& mu, const std::vector<std::size_t>& active,
               std::size_t n) {
    if (mu.kind() == Maf::Kind::OuterSum &&
        classify_gain(mu.rho()) != GainClass::Unbounded) {
        incompatible(row, "outer_sum needs an unbounded (class K-infinity) outer gain");
    }
    if (mu.kind() == Maf::Kind::BlockMaxSum) {
        std::vector<bool> covered(n + 1, false);
        for (const auto& block : mu.blocks()) {
            if (block.empty()) incompatible(row, "block_max_sum has an empty block");
            for (std::size_t j : block) {
                if (j > n) incompatible(row, "block_max_sum index " + std::to_string(j) + " out of range");
                if (covered[j]) incompatible(row, "block_max_sum blocks overlap at " + std::to_string(j));
                covered[j] = true;
            }
        }
        for (std::size_t j : active) {
            if (!covered[j]) {
                incompatible(row, "active index " + std::to_string(j) +
                                      " is not aggregated by any block");
            }
        }
    }

    Vec zero(n, 0.0);
    if (mu(zero, 0.0) != 0.0) incompatible(row, "aggregation is nonzero at the origin");
    if (active.empty()) return;

    std::mt19937_64 rng(0x5eed0000u + row);
    std::uniform_real_distribution<double> expo(-3.0, 3.0);
    std::uniform_real_distribution<double> frac(0.01, 1.0);
    for (int trial = 0; trial < 32; ++trial) {
        Vec x(n, 0.0);
        Vec y(n, 0.0);
        for (std::size_t j : active) {
            x[j] = trial == 0 ? 0.0 : std::pow(10.0, expo(rng));
            y[j] = x[j] + frac(rng) * std::max(x[j], 1e-3);
        }
        if (!(mu(y, 0.0) > mu(x, 0.0))) {
            incompatible(row, "aggregation is not strictly increasing on the active indices");
        }
    }
}

}  // namespace

GainNetwork::GainNetwork(std::vector<std::vector<GainExpr>> gamma, std::vector<GainExpr> gamma_u,
                         std::vector<Maf> mu)
    : gamma_(std::move(gamma)), gamma_u_(std::move(gamma_u)), mu_(std::move(mu)) {
    const std::size_t n = gamma_.size();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "network needs at least one subsystem");
    if (gamma_u_.size() != n || mu_.size() != n) {
        throw Error(ErrorKind::InvalidArgument, "external gains and aggregations must have one entry per row");
    }
    active_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (gamma_[i].size() != n) {
            throw Error(ErrorKind::InvalidArgument, "gain matrix row " + std::to_string(i) + " has wrong length");
        }
        if (classify_gain(gamma_[i][i]) != GainClass::Zero) {
            throw Error(ErrorKind::InvalidArgument, "diagonal gain " + std::to_string(i) + " must be zero");
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (classify_gain(gamma_[i][j]) != GainClass::Zero) active_[i].push_back(j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) audit_row(i, mu_[i], active_[i], n);
}

bool GainNetwork::has_external() const {
    return std::any_of(gamma_u_.begin(), gamma_u_.end(),
                       [](const GainExpr& g) { return classify_gain(g) != GainClass::Zero; });
}

bool GainNetwork::all_maf(Maf::Kind kind) const {
    return std::all_of(mu_.begin(), mu_.end(), [kind](const Maf& m) { return m.kind() == kind; });
}

double GainNetwork::eval_row(std::size_t i, std::span<const double> s, double r) const {
    const std::size_t n = size();
    Vec slots(n, 0.0);
    for (std::size_t j : active_[i]) slots[j] = gamma_[i][j](s[j]);
    return mu_[i](slots, r > 0.0 ? gamma_u_[i](r) : 0.0);
}

Vec GainNetwork::eval(std::span<const double> s) const { return eval_ext(s, 0.0); }

Vec GainNetwork::eval_ext(std::span<const double> s, double r) const {
    if (s.size() != size()) throw Error(ErrorKind::InvalidArgument, "operator argument has wrong dimension");
    Vec out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = eval_row(i, s, r);
    return out;
}

GainNetwork GainNetwork::restrict(std::span<const std::size_t> indices) const {
    const std::size_t n = size();
    const std::size_t m = indices.size();
    std::vector<std::size_t> position(n + 1, m + 1);
    for (std::size_t k = 0; k < m; ++k) position[indices[k]] = k;
    position[n] = m;

    std::vector<std::vector<GainExpr>> gamma(m, std::vector<GainExpr>(m));
    std::vector<GainExpr> gamma_u(m);
    std::vector<Maf> mu;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) gamma[a][b] = gamma_[indices[a]][indices[b]];
        gamma_u[a] = gamma_u_[indices[a]];
        const Maf& src = mu_[indices[a]];
        if (src.kind() == Maf::Kind::BlockMaxSum) {
            std::vector<std::vector<std::size_t>> blocks;
            for (const auto& block : src.blocks()) {
                std::vector<std::size_t> mapped;
                for (std::size_t j : block) {
                    if (position[j] <= m) mapped.push_back(position[j]);
                }
                if (!mapped.empty()) blocks.push_back(std::move(mapped));
            }
            Maf mapped = Maf::block_max_sum(std::move(blocks));
            mu.push_back(src.external_additive() ? mapped.with_additive_external() : mapped);
        } else {
            mu.push_back(src);
        }
    }
    return GainNetwork(std::move(gamma), std::move(gamma_u), std::move(mu));
}

Vec eval_operator(const GainNetwork& net, std::span<const double> s) { return net.eval(s); }

Vec eval_operator_ext(const GainNetwork& net, std::span<const double> s, double r) {
    return net.eval_ext(s, r);
}

double DiagOp::apply(double s) const {
    if (separation) return s * (*separation + alpha(s));
    return s + alpha(s);
}

Vec apply_diag(const DiagOp& d, std::span<const double> s) {
    Vec out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = d.apply(s[i]);
    return out;
}

GainOperator::GainOperator(GainNetwork net) : net_(std::move(net)) {}

GainOperator::GainOperator(GainNetwork net, DiagOp d, DiagSide side)
    : net_(std::move(net)), diag_(std::move(d)), side_(side) {}

Vec GainOperator::operator()(std::span<const double> s) const { return eval_ext(s, 0.0); }

Vec GainOperator::eval_ext(std::span<const double> s, double r) const {
    if (!diag_) return net_.eval_ext(s, r);
    if (side_ == DiagSide::Inner) {
        Vec ds = apply_diag(*diag_, s);
        return net_.eval_ext(ds, r);
    }
    return apply_diag(*diag_, net_.eval_ext(s, r));
}

GainOperator GainOperator::with_network(GainNetwork net) const {
    if (!diag_) return GainOperator(std::move(net));
    return GainOperator(std::move(net), *diag_, side_);
}

}  // namespace smallgain
