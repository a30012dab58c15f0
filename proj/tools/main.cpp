#include "commands.hpp"
#include "config.hpp"
#include "corpus.hpp"

#include "thinshield/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

using namespace thinshield;
using namespace thinshield::cli;

namespace {

/// Writes to --out when given, else stdout.
class Sink {
public:
    explicit Sink(const std::string& path)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_)
                throw Error("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

} // namespace

int main(int argc, char** argv)
{
    std::string command_line;
    for (int k = 0; k < argc; ++k)
        command_line += (k ? " " : "") + std::string(argv[k]);

    CLI::App app{"Thin-obstacle minimal surfaces: solver, frequency and free-boundary audits"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "Continuation solve; writes TOFF1 + .prov + .gamma");
    std::string config_path, datum_text, out_path;
    std::optional<int> n_opt, level_opt;
    bool dry_run = false;
    solve->add_option("-c,--config", config_path, "Experiment config file")->check(CLI::ExistingFile);
    solve->add_option("--datum", datum_text, "Boundary datum, e.g. \"barrier a=1 lift=0.001\"");
    solve->add_option("--n", n_opt, "Thin-plane dimension (1 or 2)");
    solve->add_option("--level", level_opt, "Refinement level");
    solve->add_option("-o,--out", out_path, "Output TOFF1 file");
    solve->add_flag("--dry-run", dry_run, "Print the effective config and exit");

    // frequency
    auto* freq = app.add_subcommand("frequency", "Tabulate D, H, E, D_alt and I");
    FrequencyRequest freq_req;
    std::string freq_field, freq_out;
    freq->add_option("field", freq_field, "Solution file")->required()->check(CLI::ExistingFile);
    freq->add_option("--center", freq_req.centers, "x1[,x2] or 'gamma' (repeatable)");
    freq->add_option("--radii", freq_req.radii, "Radii (default: dyadic down to 10h)")
        ->delimiter(',');
    freq->add_flag("--unit-weight", freq_req.unit_weight, "Use theta = 1");
    freq->add_option("-o,--out", freq_out, "Output table");

    // blowup
    auto* blow = app.add_subcommand("blowup", "Rescale at a point and classify the blowup");
    BlowupRequest blow_req;
    std::string blow_field, blow_out, blow_prefix;
    blow->add_option("field", blow_field, "Solution file")->required()->check(CLI::ExistingFile);
    blow->add_option("--center", blow_req.center, "x1[,x2]");
    blow->add_option("--radii", blow_req.radii, "Radii")->delimiter(',');
    blow->add_option("--level", blow_req.target_level, "Level of the rescaled fields");
    blow->add_option("--write-prefix", blow_prefix, "Write rescaled fields as PREFIX_k.toff");
    blow->add_option("-o,--out", blow_out, "Report file");

    // audit
    auto* audit = app.add_subcommand("audit", "Run the audits over a solution");
    AuditRequest audit_req;
    std::string audit_field, audit_config, audit_out;
    audit->add_option("field", audit_field, "Solution file")->required()->check(CLI::ExistingFile);
    audit->add_option("--select", audit_req.select, "Audit names (default: all)")->delimiter(',');
    audit->add_option("-c,--config", audit_config, "Config providing thresholds")
        ->check(CLI::ExistingFile);
    audit->add_option("-o,--out", audit_out, "Report file");

    // corpus
    auto* corpus = app.add_subcommand("corpus", "Run the regression corpus against its baseline");
    CorpusOptions corpus_opts;
    std::string manifest, corpus_out, corpus_dir;
    std::optional<double> newton_tol;
    corpus->add_option("manifest", manifest, "Manifest file")->required()->check(CLI::ExistingFile);
    corpus->add_option("--level", corpus_opts.level, "Override the manifest level");
    corpus->add_flag("--update-baseline", corpus_opts.update_baseline, "Rewrite the baseline");
    corpus->add_option("--newton-tolerance", newton_tol, "Override the Newton tolerance");
    corpus->add_option("--threads", corpus_opts.threads, "Worker threads (0: all cores)");
    corpus->add_option("--out-dir", corpus_dir, "Write fields and audit reports here");
    corpus->add_option("-o,--out", corpus_out, "Report file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        if (solve->parsed()) {
            ExperimentConfig cfg;
            if (!config_path.empty())
                cfg = ExperimentConfig::load(config_path);
            if (!datum_text.empty())
                cfg.datum = BoundaryDatum::parse(datum_text);
            if (n_opt)
                cfg.n = *n_opt;
            if (level_opt)
                cfg.level = *level_opt;
            cfg.validate();
            if (dry_run) {
                std::cout << cfg.emit();
                return kSuccess;
            }
            if (out_path.empty())
                throw InvalidArgument("solve: --out is required");
            return cmd_solve(cfg, out_path, std::cout, command_line);
        }
        if (freq->parsed()) {
            freq_req.field = freq_field;
            Sink sink(freq_out);
            return cmd_frequency(freq_req, sink.stream(), command_line);
        }
        if (blow->parsed()) {
            blow_req.field = blow_field;
            blow_req.out_prefix = blow_prefix;
            Sink sink(blow_out);
            return cmd_blowup(blow_req, sink.stream(), command_line);
        }
        if (audit->parsed()) {
            audit_req.field = audit_field;
            audit_req.config = audit_config;
            Sink sink(audit_out);
            return cmd_audit(audit_req, sink.stream(), command_line);
        }
        if (corpus->parsed()) {
            corpus_opts.newton_tolerance = newton_tol;
            corpus_opts.out_dir = corpus_dir;
            Sink sink(corpus_out);
            return cmd_corpus(manifest, corpus_opts, sink.stream(), command_line);
        }
    } catch (const SolverError& e) {
        std::cerr << "thinshield: solver failed: " << e.what() << '\n';
        return kNumerical;
    } catch (const Degenerate& e) {
        std::cerr << "thinshield: " << e.what() << '\n';
        return kNumerical;
    } catch (const OutOfDomain& e) {
        std::cerr << "thinshield: " << e.what() << '\n';
        return kNumerical;
    } catch (const Error& e) {
        std::cerr << "thinshield: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "thinshield: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}
