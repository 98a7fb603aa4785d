#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "smallgain/gain.hpp"
#include "smallgain/numeric.hpp"

namespace smallgain {

/// Monotone aggregation function for one row of the gain operator.
///
/// The aggregation sees n internal slots (the already-applied gains
/// gamma_ij(s_j)) and one external slot gamma_iu(r). By default the external
/// slot is aggregated like any other slot; `with_additive_external()` makes
/// it enter as mu(v, 0) + r instead.
class Maf {
public:
    enum class Kind { Sum, Max, OuterSum, BlockMaxSum };

    static Maf sum();
    static Maf max();
    /// rho(sum of all slots)
    static Maf outer_sum(GainExpr rho);
    /// Sum over blocks of the block maxima. Indices are 0-based slot numbers;
    /// index n denotes the external slot. An unlisted external slot forms its
    /// own block.
    static Maf block_max_sum(std::vector<std::vector<std::size_t>> blocks);

    Maf with_additive_external() const;

    Kind kind() const { return kind_; }
    const GainExpr& rho() const { return rho_; }
    const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
    bool external_additive() const { return external_additive_; }

    double operator()(std::span<const double> internal, double external) const;

    friend bool operator==(const Maf& a, const Maf& b);

private:
    double aggregate(std::span<const double> internal, double external) const;

    Kind kind_ = Kind::Sum;
    GainExpr rho_;
    std::vector<std::vector<std::size_t>> blocks_;
    bool external_additive_ = false;
};

const char* maf_kind_name(Maf::Kind kind);

/// Gain matrices Gamma / Gamma-bar together with the row aggregations.
///
/// Construction audits the network: zero diagonal, mu(0) = 0, and each
/// mu_i strictly increasing on the active index set of row i.
class GainNetwork {
public:
    GainNetwork(std::vector<std::vector<GainExpr>> gamma, std::vector<GainExpr> gamma_u,
                std::vector<Maf> mu);

    std::size_t size() const { return gamma_.size(); }
    const GainExpr& gain(std::size_t i, std::size_t j) const { return gamma_[i][j]; }
    const GainExpr& external_gain(std::size_t i) const { return gamma_u_[i]; }
    const Maf& maf(std::size_t i) const { return mu_[i]; }
    const std::vector<std::size_t>& active(std::size_t i) const { return active_[i]; }

    bool has_external() const;
    bool all_maf(Maf::Kind kind) const;

    /// Gamma_mu(s), i.e. the full operator with the external slot at zero.
    Vec eval(std::span<const double> s) const;
    /// Gamma-bar_mu(s, r).
    Vec eval_ext(std::span<const double> s, double r) const;
    double eval_row(std::size_t i, std::span<const double> s, double r = 0.0) const;

    /// Sub-network on `indices` (in the given order); gains leaving the set
    /// are dropped.
    GainNetwork restrict(std::span<const std::size_t> indices) const;

private:
    std::vector<std::vector<GainExpr>> gamma_;
    std::vector<GainExpr> gamma_u_;
    std::vector<Maf> mu_;
    std::vector<std::vector<std::size_t>> active_;
};

Vec eval_operator(const GainNetwork& net, std::span<const double> s);
Vec eval_operator_ext(const GainNetwork& net, std::span<const double> s, double r);

/// Diagonal operator D(s)_i = s_i + alpha(s_i). With a separation constant c
/// set, D(s)_i = s_i * (c + alpha(s_i)) instead (the multiplicative form used
/// when external gains scale the whole row).
struct DiagOp {
    GainExpr alpha;
    std::optional<double> separation;

    double apply(double s) const;
};

Vec apply_diag(const DiagOp& d, std::span<const double> s);

enum class DiagSide { Outer, Inner };

/// The monotone map a path is built for: Gamma_mu, D o Gamma_mu, or
/// Gamma_mu o D.
class GainOperator {
public:
    explicit GainOperator(GainNetwork net);
    GainOperator(GainNetwork net, DiagOp d, DiagSide side = DiagSide::Outer);

    std::size_t dim() const { return net_.size(); }
    const GainNetwork& network() const { return net_; }
    const std::optional<DiagOp>& diag() const { return diag_; }
    DiagSide side() const { return side_; }

    Vec operator()(std::span<const double> s) const;
    Vec eval_ext(std::span<const double> s, double r) const;

    /// Same diagonal composition on another network (used for sub-blocks).
    GainOperator with_network(GainNetwork net) const;

private:
    GainNetwork net_;
    std::optional<DiagOp> diag_;
    DiagSide side_ = DiagSide::Outer;
};

}  // namespace smallgain
