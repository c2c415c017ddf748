#include "ramsey/affine_model.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ramsey {

namespace {

bool entry_finite(double v) { return std::isfinite(v); }

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

std::string coord_str(int i) { return std::to_string(i + 1); }

} // namespace

Eigen::VectorXd AffineModelSpec::state_price_loading() const {
    return premium_loading_perp - premium_loading_R;
}

std::vector<bool> AffineModelSpec::admissible_mask() const {
    std::vector<bool> mask(static_cast<std::size_t>(dim), false);
    for (int c : admissible_coords) {
        if (c >= 1 && c <= dim) mask[static_cast<std::size_t>(c - 1)] = true;
    }
    return mask;
}

double AffineModelSpec::short_rate(const Eigen::VectorXd& xi) const {
    return rate_loading_a.dot(xi) + rate_loading_b;
}

double AffineModelSpec::consumption_rate(const Eigen::VectorXd& xi) const {
    return consumption_loading_a.dot(xi) + consumption_loading_b;
}

std::string ValidationReport::to_string() const {
    if (pass()) return "valid";
    std::ostringstream os;
    for (const auto& issue : issues) {
        os << issue.invariant << ": " << issue.detail << "\n";
    }
    return os.str();
}

ValidationReport validate_spec(const AffineModelSpec& spec) {
    ValidationReport report;
    auto fail = [&](const std::string& inv, const std::string& detail) {
        report.issues.push_back({inv, detail});
    };

    const int n = spec.dim;
    if (n <= 0) {
        fail("dim", "dim must be a positive integer");
        return report;
    }

    auto check_vec = [&](const Eigen::VectorXd& v, const std::string& name) {
        if (v.size() != n) {
            fail("shape", name + " has size " + std::to_string(v.size()) + ", expected " +
                              std::to_string(n));
            return false;
        }
        if (!v.allFinite()) fail("finite", name + " has a non-finite entry");
        return v.size() == n;
    };
    auto check_mat = [&](const Eigen::MatrixXd& m, const std::string& name) {
        if (m.rows() != n || m.cols() != n) {
            fail("shape", name + " is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + ", expected " + std::to_string(n) + "x" +
                              std::to_string(n));
            return false;
        }
        if (!all_finite(m)) fail("finite", name + " has a non-finite entry");
        return true;
    };

    const bool shapes_ok = check_mat(spec.drift_matrix, "drift_matrix") &
                           check_vec(spec.drift_intercept, "drift_intercept") &
                           check_mat(spec.vol_loading, "vol_loading") &
                           check_vec(spec.eigen_intercepts, "eigen_intercepts") &
                           check_mat(spec.eigen_loadings, "eigen_loadings") &
                           check_vec(spec.rate_loading_a, "rate_loading.a") &
                           check_vec(spec.consumption_loading_a, "consumption_loading.a") &
                           check_vec(spec.premium_loading_R, "premium_loading_R") &
                           check_vec(spec.premium_loading_perp, "premium_loading_perp") &
                           check_vec(spec.portfolio_loading, "portfolio_loading") &
                           check_vec(spec.xi0, "xi0");
    if (!shapes_ok) return report;
    if (!entry_finite(spec.rate_loading_b)) fail("finite", "rate_loading.b is not finite");
    if (!entry_finite(spec.consumption_loading_b))
        fail("finite", "consumption_loading.b is not finite");

    for (int c : spec.admissible_coords) {
        if (c < 1 || c > n)
            fail("admissible_coords", "coordinate " + std::to_string(c) + " outside 1.." +
                                          std::to_string(n));
    }

    // lambda_i >= 0 at the intercept and at the initial state.
    for (int i = 0; i < n; ++i) {
        if (spec.eigen_intercepts[i] < 0.0)
            fail("eigen_intercepts", "lambda0_" + coord_str(i) + " = " +
                                         std::to_string(spec.eigen_intercepts[i]) + " < 0");
        const double li = spec.eigen_loadings.row(i).dot(spec.xi0) + spec.eigen_intercepts[i];
        if (li < 0.0)
            fail("initial_variance", "lambda_" + coord_str(i) + "(xi0) = " + std::to_string(li) +
                                         " < 0");
    }

    // Support constraints of the premium/portfolio loadings along E.
    const auto mask = spec.admissible_mask();
    for (int i = 0; i < n; ++i) {
        if (!mask[static_cast<std::size_t>(i)]) {
            if (spec.premium_loading_R[i] != 0.0)
                fail("premium_loading_R", "entry " + coord_str(i) + " outside E is nonzero");
            if (spec.portfolio_loading[i] != 0.0)
                fail("portfolio_loading", "entry " + coord_str(i) + " outside E is nonzero");
        } else if (spec.premium_loading_perp[i] != 0.0) {
            fail("premium_loading_perp", "entry " + coord_str(i) + " inside E is nonzero");
        }
    }

    // Block structure: vol_loading and drift_matrix must not couple E with its
    // complement, so the projection onto E commutes with both.
    auto check_block = [&](const Eigen::MatrixXd& m, const std::string& name) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const bool ei = mask[static_cast<std::size_t>(i)];
                const bool ej = mask[static_cast<std::size_t>(j)];
                if (ei != ej && m(i, j) != 0.0)
                    fail(name, "entry (" + coord_str(i) + "," + coord_str(j) +
                                   ") couples E and its complement");
            }
        }
    };
    check_block(spec.vol_loading, "vol_loading_block");
    check_block(spec.drift_matrix, "drift_matrix_block");

    // Rate and consumption loadings define affine positive processes.
    for (int i = 0; i < n; ++i) {
        if (spec.rate_loading_a[i] < 0.0)
            fail("rate_loading", "a_" + coord_str(i) + " < 0");
        if (spec.consumption_loading_a[i] < 0.0)
            fail("consumption_loading", "a_" + coord_str(i) + " < 0");
    }
    if (spec.rate_loading_b < 0.0) fail("rate_loading", "b < 0");
    if (spec.consumption_loading_b < 0.0) fail("consumption_loading", "b < 0");

    return report;
}

void require_valid(const AffineModelSpec& spec) {
    const auto report = validate_spec(spec);
    if (!report.pass()) {
        throw std::invalid_argument("invalid model spec:\n" + report.to_string());
    }
}

EigenVariances eigen_variances(const AffineModelSpec& spec, const Eigen::VectorXd& xi) {
    EigenVariances out;
    out.lambda = spec.eigen_loadings * xi + spec.eigen_intercepts;
    for (int i = 0; i < out.lambda.size(); ++i) {
        if (out.lambda[i] < 0.0) {
            out.lambda[i] = 0.0;
            ++out.clipped;
        }
    }
    return out;
}

Eigen::VectorXd factor_drift(const AffineModelSpec& spec, const Eigen::VectorXd& xi) {
    return spec.drift_matrix * xi + spec.drift_intercept;
}

Eigen::MatrixXd diffusion_matrix(const AffineModelSpec& spec, const Eigen::VectorXd& xi) {
    const auto ev = eigen_variances(spec, xi);
    return spec.vol_loading * ev.lambda.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd project_admissible(const AffineModelSpec& spec, const Eigen::VectorXd& v) {
    Eigen::VectorXd out = v;
    const auto mask = spec.admissible_mask();
    for (int i = 0; i < out.size(); ++i) {
        if (!mask[static_cast<std::size_t>(i)]) out[i] = 0.0;
    }
    return out;
}

Eigen::VectorXd project_orthogonal(const AffineModelSpec& spec, const Eigen::VectorXd& v) {
    Eigen::VectorXd out = v;
    const auto mask = spec.admissible_mask();
    for (int i = 0; i < out.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)]) out[i] = 0.0;
    }
    return out;
}

namespace {

Eigen::VectorXd vec_from_json(const nlohmann::json& j, const std::string& key) {
    const auto& arr = j.at(key);
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
    return v;
}

Eigen::MatrixXd mat_from_json(const nlohmann::json& j, const std::string& key) {
    const auto& rows = j.at(key);
    const int n_rows = static_cast<int>(rows.size());
    const int n_cols = n_rows > 0 ? static_cast<int>(rows[0].size()) : 0;
    Eigen::MatrixXd m(n_rows, n_cols);
    for (int i = 0; i < n_rows; ++i) {
        if (static_cast<int>(rows[i].size()) != n_cols)
            throw std::invalid_argument(key + ": ragged matrix rows");
        for (int c = 0; c < n_cols; ++c) m(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

AffineModelSpec spec_from_json(const nlohmann::json& j) {
    AffineModelSpec spec;
    spec.dim = j.at("dim").get<int>();
    spec.drift_matrix = mat_from_json(j, "drift_matrix");
    spec.drift_intercept = vec_from_json(j, "drift_intercept");
    spec.vol_loading = mat_from_json(j, "vol_loading");
    spec.eigen_intercepts = vec_from_json(j, "eigen_intercepts");
    spec.eigen_loadings = mat_from_json(j, "eigen_loadings");
    spec.admissible_coords = j.at("admissible_coords").get<std::vector<int>>();
    spec.rate_loading_a = vec_from_json(j.at("rate_loading"), "a");
    spec.rate_loading_b = j.at("rate_loading").at("b").get<double>();
    spec.consumption_loading_a = vec_from_json(j.at("consumption_loading"), "a");
    spec.consumption_loading_b = j.at("consumption_loading").at("b").get<double>();
    spec.premium_loading_R = vec_from_json(j, "premium_loading_R");
    spec.premium_loading_perp = vec_from_json(j, "premium_loading_perp");
    spec.portfolio_loading = vec_from_json(j, "portfolio_loading");
    spec.xi0 = vec_from_json(j, "xi0");
    return spec;
}

nlohmann::json spec_to_json(const AffineModelSpec& spec) {
    nlohmann::json j;
    j["dim"] = spec.dim;
    j["drift_matrix"] = mat_to_json(spec.drift_matrix);
    j["drift_intercept"] = vec_to_json(spec.drift_intercept);
    j["vol_loading"] = mat_to_json(spec.vol_loading);
    j["eigen_intercepts"] = vec_to_json(spec.eigen_intercepts);
    j["eigen_loadings"] = mat_to_json(spec.eigen_loadings);
    j["admissible_coords"] = spec.admissible_coords;
    j["rate_loading"] = {{"a", vec_to_json(spec.rate_loading_a)}, {"b", spec.rate_loading_b}};
    j["consumption_loading"] = {{"a", vec_to_json(spec.consumption_loading_a)},
                                {"b", spec.consumption_loading_b}};
    j["premium_loading_R"] = vec_to_json(spec.premium_loading_R);
    j["premium_loading_perp"] = vec_to_json(spec.premium_loading_perp);
    j["portfolio_loading"] = vec_to_json(spec.portfolio_loading);
    j["xi0"] = vec_to_json(spec.xi0);
    return j;
}

std::string spec_content_hash(const AffineModelSpec& spec) {
    // nlohmann::json orders object keys, so the dump is canonical.
    const std::string dump = spec_to_json(spec).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace ramsey
