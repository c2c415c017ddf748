#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ramsey {

/// Time-constant parameterization of an N-factor affine diffusion
///   d xi = (drift_matrix * xi + drift_intercept) dt + vol_loading * diag(sqrt(lambda_i(xi))) dW
/// with affine eigenvariances lambda_i(xi) = eigen_loadings.row(i) . xi + eigen_intercepts[i],
/// together with the affine loadings of the short rate, the consumption rate and the
/// optimal-process volatilities. `admissible_coords` lists the factor coordinates (1-based)
/// spanning the admissible portfolio space E; loadings tagged R live on E, loadings tagged
/// perp on its complement, and both vol_loading and drift_matrix must be block diagonal
/// with respect to that split.
struct AffineModelSpec {
    int dim = 0;
    Eigen::MatrixXd drift_matrix;       // N x N
    Eigen::VectorXd drift_intercept;    // N
    Eigen::MatrixXd vol_loading;        // N x N
    Eigen::VectorXd eigen_intercepts;   // N, each >= 0
    Eigen::MatrixXd eigen_loadings;     // N x N, row i drives lambda_i
    std::vector<int> admissible_coords; // 1-based coordinate subset E
    Eigen::VectorXd rate_loading_a;     // short rate r = a . xi + b
    double rate_loading_b = 0.0;
    Eigen::VectorXd consumption_loading_a; // consumption rate zeta = a . xi + b
    double consumption_loading_b = 0.0;
    Eigen::VectorXd premium_loading_R;    // hedgeable risk premium, supported on E
    Eigen::VectorXd premium_loading_perp; // orthogonal state-price direction, on complement of E
    Eigen::VectorXd portfolio_loading;    // optimal portfolio, supported on E
    Eigen::VectorXd xi0;

    // Combined log-volatility loading of the optimal state price density:
    // premium_loading_perp - premium_loading_R.
    Eigen::VectorXd state_price_loading() const;

    // mask[i] is true iff coordinate i (0-based) lies in E.
    std::vector<bool> admissible_mask() const;

    double short_rate(const Eigen::VectorXd& xi) const;
    double consumption_rate(const Eigen::VectorXd& xi) const;
};

struct ValidationIssue {
    std::string invariant;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool pass() const { return issues.empty(); }
    std::string to_string() const;
};

// Checks every structural invariant of the spec and reports each violation with the
// offending entry. Downstream operations reject specs whose report does not pass.
ValidationReport validate_spec(const AffineModelSpec& spec);

// Throws std::invalid_argument carrying the report if validation fails.
void require_valid(const AffineModelSpec& spec);

struct EigenVariances {
    Eigen::VectorXd lambda; // clipped at zero
    int clipped = 0;        // number of coordinates truncated
};

// lambda_i(xi) with the full-truncation convention: negative values are clipped at 0
// and counted.
EigenVariances eigen_variances(const AffineModelSpec& spec, const Eigen::VectorXd& xi);

// drift_matrix * xi + drift_intercept
Eigen::VectorXd factor_drift(const AffineModelSpec& spec, const Eigen::VectorXd& xi);

// vol_loading * diag(sqrt(lambda_i(xi)+))
Eigen::MatrixXd diffusion_matrix(const AffineModelSpec& spec, const Eigen::VectorXd& xi);

// Orthogonal split of a loading vector along E: entries outside E zeroed
// (resp. inside E for the complement).
Eigen::VectorXd project_admissible(const AffineModelSpec& spec, const Eigen::VectorXd& v);
Eigen::VectorXd project_orthogonal(const AffineModelSpec& spec, const Eigen::VectorXd& v);

// JSON ingestion and canonical echo. Field names match the struct members; matrices are
// row-major arrays of arrays, rate/consumption loadings are {"a": [...], "b": x}.
AffineModelSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const AffineModelSpec& spec);

// FNV-1a 64-bit hash (hex) of the canonical JSON dump; used in output manifests.
std::string spec_content_hash(const AffineModelSpec& spec);

} // namespace ramsey
