#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qspec/lattice.hpp"
#include "qspec/spectral.hpp"
#include "qspec/transform.hpp"
#include "qspec/verify.hpp"

namespace {

using qspec::verify::Preset;
using qspec::verify::RunConfig;

struct CliOpts {
    RunConfig cfg;
    double s_re = 0.5;
    double s_im = 0.8660254037844386;
    std::string input;
    int ortho_n = 8;
};

void add_common(CLI::App* cmd, CliOpts& o) {
    cmd->add_option("--q", o.cfg.q, "Base q in (0, 0.999]")->capture_default_str();
    cmd->add_option("--a", o.cfg.a, "Parameter a with 0 < a^2 < 1")->capture_default_str();
    cmd->add_option("--s-re", o.s_re, "Re(s)")->capture_default_str();
    cmd->add_option("--s-im", o.s_im, "Im(s)")->capture_default_str();
    cmd->add_option("--z", o.cfg.z, "Positive-chain anchor z in (q, 1]")->capture_default_str();
    cmd->add_option("--tol", o.cfg.tol, "Headline tolerance")->capture_default_str();
    cmd->add_option("--n-quad", o.cfg.n_quad, "Gauss-Legendre nodes on (0, pi)")->capture_default_str();
    std::map<std::string, Preset> presets{{"generic", Preset::generic},
                                          {"symmetric", Preset::symmetric},
                                          {"laguerre", Preset::laguerre}};
    cmd->add_option("--preset", o.cfg.preset, "Parameter preset")
        ->transform(CLI::CheckedTransformer(presets, CLI::ignore_case));
    cmd->add_option("--alpha", o.cfg.alpha, "Laguerre order (needs alpha < -1/2)")->capture_default_str();
    cmd->add_option("--seed", o.cfg.seed, "RNG seed for the randomized checks")->capture_default_str();
    cmd->add_option("--out", o.cfg.out, "Output file (default stdout)");
    cmd->add_option("--format", o.cfg.format, "Output format: json or csv")->capture_default_str();
}

void emit(const std::string& path, const std::string& payload) {
    if (path.empty()) {
        std::cout << payload << "\n";
        return;
    }
    std::ofstream f(path);
    if (!f) throw qspec::Error("cannot open output file: " + path);
    f << payload << "\n";
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw qspec::Error("cannot open input file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int cmd_verify(CliOpts& o) {
    auto rep = qspec::verify::run_verify(o.cfg);
    for (const auto& c : rep.suite)
        std::printf("[%s] %-38s residual %.3e  tol %.1e\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.residual, c.tolerance);
    std::printf("%zu checks, %s\n", rep.suite.size(), rep.all_pass() ? "all passed" : "FAILURES");
    if (!o.cfg.out.empty()) emit(o.cfg.out, rep.to_json());
    return rep.all_pass() ? 0 : 1;
}

int cmd_measure(CliOpts& o) {
    emit(o.cfg.out, qspec::verify::export_measure(o.cfg));
    return 0;
}

int cmd_spectrum(CliOpts& o) {
    auto pr = o.cfg.resolved();
    auto sp = qspec::spectral::discrete_spectrum(pr);
    if (o.cfg.format == "csv") {
        std::ostringstream ss;
        ss << "lambda,mass\n";
        char buf[64];
        for (const auto& at : sp.atoms) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", at.lambda, at.mass);
            ss << buf;
        }
        emit(o.cfg.out, ss.str());
    } else {
        nlohmann::json j;
        j["atoms"] = nlohmann::json::array();
        for (const auto& at : sp.atoms) j["atoms"].push_back({{"lambda", at.lambda}, {"mass", at.mass}});
        j["count"] = sp.atoms.size();
        emit(o.cfg.out, j.dump(2));
    }
    return 0;
}

int cmd_ortho(CliOpts& o) {
    auto pr = o.cfg.resolved();
    // degree-n moments weight atom m like q^{-2nm} against masses of size
    // q^{m^2+m}, so the atom list has to reach past m = n before the high
    // moments are complete
    double atom_tol = std::pow(pr.q, (o.ortho_n + 6) * (o.ortho_n + 7));
    auto m = qspec::spectral::build_measure(pr, o.cfg.n_quad, atom_tol);
    auto gram = qspec::spectral::orthogonality_matrix(o.ortho_n, m);
    double worst_off = 0.0;
    nlohmann::json j;
    j["n"] = o.ortho_n;
    j["diag"] = nlohmann::json::array();
    for (int n = 0; n <= o.ortho_n; ++n) {
        j["diag"].push_back(gram[n][n].real());
        for (int k = 0; k < n; ++k) {
            double sc = std::sqrt(gram[n][n].real() * gram[k][k].real());
            worst_off = std::max(worst_off, std::abs(gram[n][k]) / sc);
        }
    }
    j["max_offdiag_normalized"] = worst_off;
    j["tol"] = o.cfg.tol;
    j["pass"] = worst_off <= o.cfg.tol;
    emit(o.cfg.out, j.dump(2));
    return worst_off <= o.cfg.tol ? 0 : 1;
}

int cmd_transform(CliOpts& o) {
    auto pr = o.cfg.resolved();
    qspec::lattice::Grid g(pr, o.cfg.neg_depth, o.cfg.pos_low, o.cfg.pos_high);
    auto f = qspec::lattice::grid_function_from_json(g, slurp(o.input));
    auto m = qspec::spectral::build_measure(pr, o.cfg.n_quad);
    auto h = qspec::transform::forward_F(f, m);
    emit(o.cfg.out, qspec::transform::hfunction_to_json(h, m));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral toolkit for a second-order q-difference operator"};
    app.require_subcommand(1);

    CliOpts o;
    auto* verify = app.add_subcommand("verify", "run the verification suites and report");
    add_common(verify, o);
    auto* measure = app.add_subcommand("measure", "export the spectral measure");
    add_common(measure, o);
    auto* spectrum = app.add_subcommand("spectrum", "list the point spectrum with masses");
    add_common(spectrum, o);
    auto* ortho = app.add_subcommand("ortho", "polynomial Gram matrix against the measure");
    add_common(ortho, o);
    ortho->add_option("--n", o.ortho_n, "Gram matrix order (<= 20)")->capture_default_str();
    auto* transform = app.add_subcommand("transform", "forward transform of a grid function");
    add_common(transform, o);
    transform->add_option("--input", o.input, "grid function JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        o.cfg.s = {o.s_re, o.s_im};
        if (verify->parsed()) return cmd_verify(o);
        if (measure->parsed()) return cmd_measure(o);
        if (spectrum->parsed()) return cmd_spectrum(o);
        if (ortho->parsed()) return cmd_ortho(o);
        if (transform->parsed()) return cmd_transform(o);
    } catch (const qspec::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
