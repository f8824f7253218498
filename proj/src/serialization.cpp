#include "hctl/serialization.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hctl/error.hpp"

namespace hctl {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw ConfigError(std::string("artifact field '") + what + "' has the wrong number of rows");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[i].size()) != cols)
            throw ConfigError(std::string("artifact field '") + what + "' has the wrong number of columns");
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

json phasor_json(const PhasorVector& X) {
    return {{"omega", X.omega()},
            {"h", X.order()},
            {"channels", X.channels()},
            {"real_valued", X.real_valued()},
            {"re", matrix_json(X.coeffs().real())},
            {"im", matrix_json(X.coeffs().imag())}};
}

PhasorVector phasor_from(const json& j) {
    const int    h  = j.at("h").get<int>();
    const int    ch = j.at("channels").get<int>();
    PhasorVector X(ch, h, j.at("omega").get<double>(), j.value("real_valued", true));
    const Eigen::MatrixXd re = matrix_from(j.at("re"), ch, 2 * h + 1, "re");
    const Eigen::MatrixXd im = matrix_from(j.at("im"), ch, 2 * h + 1, "im");
    X.coeffs().real()        = re;
    X.coeffs().imag()        = im;
    return X;
}

json periodic_json(const PeriodicMatrix& P) {
    json re = json::array(), im = json::array();
    for (int k = -P.order(); k <= P.order(); ++k) {
        re.push_back(matrix_json(P.coeff_ref(k).real()));
        im.push_back(matrix_json(P.coeff_ref(k).imag()));
    }
    return {{"omega", P.omega()}, {"h", P.order()}, {"rows", P.rows()}, {"cols", P.cols()}, {"re", re}, {"im", im}};
}

PeriodicMatrix periodic_from(const json& j) {
    const int h = j.at("h").get<int>(), rows = j.at("rows").get<int>(), cols = j.at("cols").get<int>();
    PeriodicMatrix P(rows, cols, h, j.at("omega").get<double>());
    const json&    re = j.at("re");
    const json&    im = j.at("im");
    if (re.size() != static_cast<std::size_t>(2 * h + 1) || im.size() != re.size())
        throw ConfigError("periodic matrix has the wrong number of coefficients");
    for (int k = -h; k <= h; ++k) {
        P.coeff_ref(k).real() = matrix_from(re[k + h], rows, cols, "re");
        P.coeff_ref(k).imag() = matrix_from(im[k + h], rows, cols, "im");
    }
    return P;
}

json solve_report_json(const SolveReport& r) {
    return {{"keep_order", r.keep_order}, {"solve_order", r.solve_order}, {"escalations", r.escalations},
            {"residual", r.residual},     {"gap", r.gap},                 {"time_residual", r.time_residual}};
}

SolveReport solve_report_from(const json& j) {
    SolveReport r;
    r.keep_order    = j.value("keep_order", 0);
    r.solve_order   = j.value("solve_order", 0);
    r.escalations   = j.value("escalations", 0);
    r.residual      = j.value("residual", 0.0);
    r.gap           = j.value("gap", 0.0);
    r.time_residual = j.value("time_residual", 0.0);
    return r;
}

json report_json(const SynthesisReport& r) {
    return {{"H1", r.H1},
            {"alpha_prime", r.alpha_prime},
            {"sigma_gp", r.sigma_gp},
            {"sigma_gmm", r.sigma_gmm},
            {"lyapunov", solve_report_json(r.lyapunov)},
            {"sylvester", solve_report_json(r.sylvester)},
            {"lyapunov_residual", r.lyapunov.residual},
            {"sylvester_residual", r.sylvester.residual},
            {"p_min_eigenvalue", r.p_min_eigenvalue},
            {"open_loop_margin", r.open_loop_margin},
            {"min_damping", r.closed_loop_margin},
            {"wall_time", r.wall_time},
            {"h1_reference", r.h1_reference},
            {"alpha_reference", r.alpha_reference},
            {"notes", r.notes}};
}

SynthesisReport report_from(const json& j) {
    SynthesisReport r;
    r.H1                 = j.value("H1", 0.0);
    r.alpha_prime        = j.value("alpha_prime", 0.0);
    r.sigma_gp           = j.value("sigma_gp", 0.0);
    r.sigma_gmm          = j.value("sigma_gmm", 0.0);
    if (j.contains("lyapunov")) r.lyapunov = solve_report_from(j["lyapunov"]);
    if (j.contains("sylvester")) r.sylvester = solve_report_from(j["sylvester"]);
    r.p_min_eigenvalue   = j.value("p_min_eigenvalue", 0.0);
    r.open_loop_margin   = j.value("open_loop_margin", 0.0);
    r.closed_loop_margin = j.value("min_damping", 0.0);
    r.wall_time          = j.value("wall_time", 0.0);
    r.notes              = j.value("notes", std::vector<std::string>{});
    return r;
}

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

std::string  phasor_to_json(const PhasorVector& X) { return phasor_json(X).dump(); }
PhasorVector phasor_from_json(const std::string& text) {
    try {
        return phasor_from(parse_text(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("phasor JSON: ") + e.what());
    }
}

std::string    periodic_to_json(const PeriodicMatrix& P) { return periodic_json(P).dump(); }
PeriodicMatrix periodic_from_json(const std::string& text) {
    try {
        return periodic_from(parse_text(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("periodic matrix JSON: ") + e.what());
    }
}

std::string report_to_json(const SynthesisReport& r, int indent) { return report_json(r).dump(indent); }

std::string artifact_to_json(const ControllerArtifact& a, int indent) {
    const ConverterParams& p = a.params;
    const Setpoint&        s = a.setpoint;
    json                   j = {
        {"schema_version", kArtifactSchemaVersion},
        {"kind", to_string(a.kind)},
        {"params",
                           {{"r", p.r}, {"L", p.L}, {"C", p.C}, {"R_L", p.R_L}, {"E_rms", p.E_rms}, {"omega", p.omega}, {"v_dc_ref", p.v_dc_ref}}},
        {"setpoint",
                           {{"i_sink", s.i_sink},
                            {"i_dc", s.i_dc},
                            {"v_dc", s.v_dc},
                            {"i_dq", {s.i_dq(0), s.i_dq(1)}},
                            {"d_dq", {s.d_dq(0), s.d_dq(1)}},
                            {"e_dq", {s.e_dq(0), s.e_dq(1)}},
                            {"order", s.X.order()}}},
        {"H1", a.H1},
        {"H2", matrix_json(a.H2)},
        {"O", matrix_json(a.O)},
        {"L", matrix_json(a.bank.L)},
        {"bank_harmonics", a.bank.harmonics},
        {"bank_weights", std::vector<double>(a.bank.weights.data(), a.bank.weights.data() + a.bank.weights.size())},
        {"C", periodic_json(a.C)},
        {"P", periodic_json(a.P)},
        {"M", periodic_json(a.M)},
        {"P_full", periodic_json(a.P_full)},
        {"M_full", periodic_json(a.M_full)},
        {"omega_nominal", a.omega_nominal},
        {"Ts", a.Ts},
        {"integrator", a.integrator == IntegratorDiscretization::zoh ? "zoh" : "as_printed"},
        {"report", report_json(a.report)},
    };
    return j.dump(indent);
}

ControllerArtifact artifact_from_json(const std::string& text) {
    const json j = parse_text(text);
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kArtifactSchemaVersion)
            throw ConfigError("unsupported artifact schema version " + std::to_string(version));
        ControllerArtifact a;
        a.kind = parse_controller_kind(j.at("kind").get<std::string>());
        const json& p = j.at("params");
        a.params.r        = p.at("r").get<double>();
        a.params.L        = p.at("L").get<double>();
        a.params.C        = p.at("C").get<double>();
        a.params.R_L      = p.at("R_L").get<double>();
        a.params.E_rms    = p.at("E_rms").get<double>();
        a.params.omega    = p.at("omega").get<double>();
        a.params.v_dc_ref = p.at("v_dc_ref").get<double>();
        a.params.validate();
        const json& s = j.at("setpoint");
        a.setpoint    = compute_setpoint(a.params, s.at("i_sink").get<double>(), s.at("order").get<int>());

        a.bank.harmonics = j.at("bank_harmonics").get<std::vector<int>>();
        int dim          = 0;
        for (int k : a.bank.harmonics) dim += k == 0 ? 1 : 2;
        a.bank.L = matrix_from(j.at("L"), dim, 3, "L");
        const auto w = j.at("bank_weights").get<std::vector<double>>();
        if (static_cast<int>(w.size()) != dim) throw ConfigError("artifact bank weights have the wrong size");
        a.bank.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), dim);

        a.H1            = j.at("H1").get<double>();
        a.H2            = matrix_from(j.at("H2"), dim, dim, "H2");
        a.O             = matrix_from(j.at("O"), dim, dim, "O");
        a.C             = periodic_from(j.at("C"));
        a.P             = periodic_from(j.at("P"));
        a.M             = periodic_from(j.at("M"));
        a.P_full        = periodic_from(j.at("P_full"));
        a.M_full        = periodic_from(j.at("M_full"));
        a.omega_nominal = j.at("omega_nominal").get<double>();
        a.Ts            = j.at("Ts").get<double>();
        a.integrator    = j.at("integrator").get<std::string>() == "zoh" ? IntegratorDiscretization::zoh
                                                                        : IntegratorDiscretization::as_printed;
        if (j.contains("report")) a.report = report_from(j.at("report"));
        if (a.P.rows() != 4 || a.P.cols() != 4 || a.M.rows() != dim || (dim > 0 && a.M.cols() != 4))
            throw ConfigError("artifact gain shapes are inconsistent");
        return a;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("artifact JSON: ") + e.what());
    }
}

void save_artifact(const ControllerArtifact& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write artifact '" + path + "'");
    out << artifact_to_json(a) << '\n';
}

ControllerArtifact load_artifact(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open artifact '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return artifact_from_json(ss.str());
}

}  // namespace hctl
