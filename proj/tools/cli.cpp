#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace kronrev::cli {

namespace {

std::string stem_of(const std::string& output) {
    if (output.empty() || output == "-") return "kronrev";
    const auto dot = output.rfind(".json");
    return dot == std::string::npos ? output : output.substr(0, dot);
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-")
        out << text;
    else
        write_text_file(path, text);
}

void add_tolerance_flags(CLI::App* app, RunConfig& cfg) {
    app->add_option("--tol-gamma", cfg.tol.tol_gamma, "relative tolerance of the sibling test")
        ->check(CLI::PositiveNumber);
    app->add_option("--round-trip-tol", cfg.tol.round_trip_tol, "accepted relative reconstruction error")
        ->check(CLI::PositiveNumber);
}

struct GenerateArgs {
    int measured = 0;
    int hidden = 0;
    bool uniform = false;
};

int cmd_generate(const GenerateArgs& g, const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    const RadialNetwork net = generate_radial(g.measured, g.hidden, g.uniform, cfg.seed);
    const BlockMatrix y = admittance_from_network(net);
    const std::string net_text = network_to_json(net).dump(2) + "\n";
    const std::string y_text = matrix_to_json(y).dump(2) + "\n";
    if (cfg.output.empty() || cfg.output == "-") {
        out << net_text;
    } else {
        write_text_file(cfg.output, net_text);
        write_text_file(stem_of(cfg.output) + ".Y.json", y_text);
    }
    log << "generated " << net.size() << " nodes (" << net.hidden().size() << " hidden, "
              << (g.uniform ? "uniform" : "non-uniform") << " lines), seed " << cfg.seed << "\n";
    return kOk;
}

struct ReduceArgs {
    int hidden = 0;
    bool iterative = false;
};

int cmd_reduce(const ReduceArgs& r, const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    const json in = read_json_file(cfg.input);
    BlockMatrix y(0);
    std::vector<int> hidden, keep;
    if (in.contains("nodes")) {
        const RadialNetwork net = network_from_json(in);
        y = admittance_from_network(net);
        for (int label : net.measured()) keep.push_back(net.index_of(label));
        for (int label : net.hidden()) hidden.push_back(net.index_of(label));
    } else {
        y = matrix_from_json(in);
        if (r.hidden < 0 || r.hidden >= y.n())
            throw Error(ErrorKind::InvalidSubset, "hidden count must leave at least one measured block");
        for (int i = 0; i < y.n(); ++i) (i < y.n() - r.hidden ? keep : hidden).push_back(i);
    }

    const BlockMatrix ybar = hidden.empty() ? y : schur_complement(y, keep);

    if (r.iterative || cfg.emit_trace) {
        std::vector<int> order_keep = keep;
        std::sort(order_keep.begin(), order_keep.end());
        const ForwardResult fr = iterative_reduce_components(y, hidden);
        const BlockMatrix direct = schur_complement(y, order_keep);
        const double diff = rel_diff(fr.reduced, direct);
        if (diff > cfg.tol.tau_solve)
            throw Error(ErrorKind::MalformedReduction,
                        "iterative and direct reductions differ by " + std::to_string(diff));
        log << "iterative reduction agrees with the direct Schur complement (rel diff " << diff << ")\n";
        if (cfg.emit_trace) write_text_file(stem_of(cfg.output) + ".trace.json", trace_to_json(fr.trace).dump(2) + "\n");
    }
    if (cfg.emit_dot) write_text_file(stem_of(cfg.output) + ".dot", reduction_to_dot(ybar, cfg.tol.tau_zero));
    emit(cfg.output, matrix_to_json(ybar).dump(2) + "\n", out);
    return kOk;
}

struct IdentifyArgs {
    std::string measurements;
};

int cmd_identify(const IdentifyArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    BlockMatrix ybar(0);
    if (!a.measurements.empty()) {
        std::ifstream in(a.measurements);
        if (!in) throw Error(ErrorKind::Format, "cannot open " + a.measurements);
        ybar = estimate_kron_reduced(read_measurements_csv(in));
        log << "estimated reduced matrix from " << a.measurements << "\n";
    } else {
        ybar = matrix_from_json(read_json_file(cfg.input));
    }

    const IdentifyReport rep = identify_full_report(ybar, cfg.tol);
    const auto& p = rep.plan;
    log << "measured: " << ybar.n() << " (" << p.partition.measured_internal.size() << " internal, "
              << p.partition.measured_boundary.size() << " boundary)\n";
    log << "cliques: " << p.pieces.size() << "\n";
    for (size_t k = 0; k < p.pieces.size(); ++k) {
        log << "  clique " << k + 1 << ": {";
        for (size_t i = 0; i < p.pieces[k].members.size(); ++i) log << (i ? "," : "") << p.pieces[k].members[i];
        log << "}";
        for (const auto& att : p.pieces[k].attachments) log << "  " << describe(att);
        log << "\n";
    }
    log << "hidden nodes recovered: " << rep.network.hidden().size() << "\n";
    log << "round-trip residual: " << rep.round_trip_error << "\n";

    if (cfg.emit_trace) write_text_file(stem_of(cfg.output) + ".plan.json", plan_to_json(p).dump(2) + "\n");
    if (cfg.emit_dot) write_text_file(stem_of(cfg.output) + ".dot", network_to_dot(rep.network));
    emit(cfg.output, network_to_json(rep.network).dump(2) + "\n", out);
    return kOk;
}

struct RoundTripArgs {
    int measured = 0;
    int hidden = 0;
    std::string seeds = "0";
};

int cmd_roundtrip(const RoundTripArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    const auto seeds = parse_seed_range(a.seeds);
    const int m = a.measured, h = a.hidden;
    if (seeds.empty()) throw Error(ErrorKind::Format, "no seeds");
    generate_radial(m, h, true, seeds.front());  // infeasible sizes fail once, up front
    const auto report =
        run_round_trip([m, h](uint64_t seed) { return generate_radial(m, h, true, seed); }, seeds, cfg.tol);
    for (const auto& o : report.outcomes) {
        out << "seed " << o.seed << ": " << (o.pass ? "ok" : "FAIL");
        if (o.failure.empty()) {
            out << " error " << o.error;
        } else {
            out << " " << o.failure;
            log << "seed " << o.seed << ": " << o.failure << "\n";
        }
        out << "\n";
    }
    const size_t n = report.outcomes.size();
    out << "passed " << n - report.failures << "/" << n << ", max error " << report.max_error << ", wall time "
        << report.seconds << " s\n";
    return report.failures == 0 ? kOk : kRoundTripFailure;
}

}  // namespace

RoundTripOutcome round_trip_one(const RadialNetwork& net, const Tolerances& tol) {
    RoundTripOutcome o;
    // Instances that break the structural assumptions still go through the pipeline; the report names the breach.
    const auto violations = validate(net);
    std::string note;
    if (!violations.empty()) note = " (source network: " + violations.front().message + ")";
    try {
        std::vector<int> keep;
        for (int label : net.measured()) keep.push_back(net.index_of(label));
        const BlockMatrix ybar = schur_complement(assemble_admittance(net), keep);
        const RadialNetwork rec = identify_full(ybar, tol);
        const auto err = relabeled_edge_error(net, rec);
        if (!err) {
            o.failure = "topology mismatch";
        } else {
            o.error = *err;
            o.pass = *err <= tol.round_trip_tol;
            if (!o.pass) o.failure = "edge error " + std::to_string(*err);
        }
    } catch (const Error& e) {
        o.failure = e.what();
    }
    if (!o.pass) o.failure += note;
    return o;
}

RoundTripReport run_round_trip(const InstanceFactory& make, const std::vector<uint64_t>& seeds, const Tolerances& tol,
                               int workers) {
    const auto start = std::chrono::steady_clock::now();
    RoundTripReport rep;
    rep.outcomes.resize(seeds.size());
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min<int>(workers, static_cast<int>(std::max<size_t>(1, seeds.size())));

    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next++; i < seeds.size(); i = next++) {
            RoundTripOutcome o;
            try {
                o = round_trip_one(make(seeds[i]), tol);
            } catch (const Error& e) {
                o.failure = e.what();
            }
            o.seed = seeds[i];
            rep.outcomes[i] = std::move(o);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    for (const auto& o : rep.outcomes) {
        rep.max_error = std::max(rep.max_error, o.error);
        if (!o.pass) ++rep.failures;
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

std::vector<uint64_t> parse_seed_range(const std::string& text) {
    const auto dots = text.find("..");
    try {
        size_t used = 0;
        if (dots == std::string::npos) {
            const uint64_t s = std::stoull(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return {s};
        }
        const std::string lo_s = text.substr(0, dots), hi_s = text.substr(dots + 2);
        const uint64_t lo = std::stoull(lo_s, &used);
        if (used != lo_s.size()) throw std::invalid_argument(text);
        const uint64_t hi = std::stoull(hi_s, &used);
        if (used != hi_s.size() || hi < lo) throw std::invalid_argument(text);
        std::vector<uint64_t> out;
        for (uint64_t s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::Format, "bad seed range '" + text + "', expected N or A..B");
    }
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::Infeasible:
    case ErrorKind::Format:
    case ErrorKind::InvalidSubset:
    case ErrorKind::SizeMismatch:
    case ErrorKind::ValidationFailed: return kInfeasible;
    case ErrorKind::SingularBlock:
    case ErrorKind::SingularSubmatrix: return kSingular;
    default: return kPipelineError;
    }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kron reduction of three-phase radial networks and its inverse"};
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);

    RunConfig cfg;

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "random radial network and its admittance matrix");
    g->set_help_flag("--help", "print help");
    g->add_option("-m,--measured", gen.measured, "measured nodes")->required();
    g->add_option("-h,--hidden", gen.hidden, "hidden nodes")->required();
    g->add_flag("--uniform", gen.uniform, "lines are multiples of one admittance");
    g->add_option("--seed", cfg.seed, "RNG seed");
    g->add_option("-o,--output", cfg.output, "network JSON path; the matrix goes to <stem>.Y.json");

    ReduceArgs red;
    auto* r = app.add_subcommand("reduce", "Kron-reduce a network or matrix onto its measured nodes");
    r->set_help_flag("--help", "print help");
    r->add_option("input", cfg.input, "network or block-matrix JSON")->required();
    r->add_option("-h,--hidden", red.hidden, "trailing hidden blocks when the input is a matrix");
    r->add_option("-o,--output", cfg.output, "reduced matrix JSON path");
    r->add_flag("--iterative", red.iterative, "also run the iterative reduction and check agreement");
    r->add_flag("--emit-trace", cfg.emit_trace, "write <stem>.trace.json");
    r->add_flag("--emit-dot", cfg.emit_dot, "write <stem>.dot with the cliques of the reduced graph");

    IdentifyArgs idf;
    auto* id = app.add_subcommand("identify", "recover the full network from its reduced matrix");
    id->set_help_flag("--help", "print help");
    auto* in_opt = id->add_option("input", cfg.input, "reduced block-matrix JSON");
    auto* meas_opt = id->add_option("--from-measurements", idf.measurements, "phasor CSV (t,node,phase,V_re,V_im,I_re,I_im)");
    in_opt->excludes(meas_opt);
    id->add_option("-o,--output", cfg.output, "recovered network JSON path");
    id->add_flag("--emit-trace", cfg.emit_trace, "write <stem>.plan.json");
    id->add_flag("--emit-dot", cfg.emit_dot, "write <stem>.dot of the recovered network");
    add_tolerance_flags(id, cfg);

    RoundTripArgs rt;
    auto* t = app.add_subcommand("roundtrip", "generate, reduce and identify a batch of uniform-line networks");
    t->set_help_flag("--help", "print help");
    t->add_option("-m,--measured", rt.measured, "measured nodes")->required();
    t->add_option("-h,--hidden", rt.hidden, "hidden nodes")->required();
    t->add_option("--seeds,--seed", rt.seeds, "seed or inclusive range A..B");
    t->add_flag("--uniform", "accepted for symmetry with generate; lines are always uniform here");
    add_tolerance_flags(t, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInfeasible;
    }
    auto* sub = app.get_subcommands().front();
    if (sub->get_help_ptr()->count() > 0) {
        out << sub->help();
        return kOk;
    }

    try {
        if (sub == g) return cmd_generate(gen, cfg, out, err);
        if (sub == r) return cmd_reduce(red, cfg, out, err);
        if (sub == id) {
            if (cfg.input.empty() && idf.measurements.empty())
                throw Error(ErrorKind::Format, "identify needs an input matrix or --from-measurements");
            try {
                return cmd_identify(idf, cfg, out, err);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::Format) throw;
                err << "error: " << e.what() << "\n";
                return kPipelineError;
            }
        }
        return cmd_roundtrip(rt, cfg, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace kronrev::cli
