#include <doctest.h>

#include "commands.hpp"
#include "config.hpp"
#include "corpus.hpp"

#include "thinshield/error.hpp"
#include "thinshield/frequency.hpp"
#include "thinshield/io.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace thinshield;
using namespace thinshield::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir()
{
    const fs::path dir = fs::temp_directory_path() / ("thinshield_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

ExperimentConfig small_barrier()
{
    ExperimentConfig cfg;
    cfg.level = 3;
    cfg.datum = BoundaryDatum::make_barrier(1.0, 0.5);
    return cfg;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("config round trip")
    {
        ExperimentConfig cfg;
        cfg.n = 2;
        cfg.level = 2;
        cfg.datum = BoundaryDatum::make_profile({ProfileFamily::Pi, 2}, 0.25, 0.01);
        cfg.penalty.epsilon0 = 0.2;
        cfg.penalty.lipschitz = 3.5;
        cfg.penalty.newton.tolerance = 1e-11;
        cfg.audit.select = {"signorini", "identity"};
        cfg.audit.alpha_min = 0.45;
        const std::string text = cfg.emit();
        const auto back = ExperimentConfig::parse(text);
        CHECK(back == cfg);
        CHECK(back.emit() == text);
        CHECK(ExperimentConfig::parse(ExperimentConfig{}.emit()) == ExperimentConfig{});

        for (const char* d : {"constant c=0.5", "barrier a=2 lift=0.001", "tilted a=1 lift=0.5 tilt=0.25",
                              "profile family=PSI m=1 scale=0.2 lift=0"})
            CHECK(BoundaryDatum::parse(BoundaryDatum::parse(d).emit()) == BoundaryDatum::parse(d));
    }

    TEST_CASE("malformed and invalid configs")
    {
        CHECK_THROWS_AS(ExperimentConfig::parse("level 4\n"), FormatError);
        CHECK_THROWS_AS(ExperimentConfig::parse("colour: blue\n"), FormatError);
        CHECK_THROWS_AS(ExperimentConfig::parse("datum: teapot h=1\n"), Error);
        CHECK_THROWS_AS(ExperimentConfig::parse("[penalty]\nepsilon0: -0.1\n"), InvalidArgument);
        CHECK_THROWS_AS(ExperimentConfig::parse("[newton]\ntolerance: 0\n"), InvalidArgument);
        CHECK_THROWS_AS(ExperimentConfig::parse("[audit]\nselect: signorini bogus\n"), InvalidArgument);
        CHECK_THROWS_AS(ExperimentConfig::parse("n: 3\n"), InvalidArgument);
        CHECK_THROWS_AS(ExperimentConfig::parse("n: 2\nlevel: 8\n"), InvalidArgument);
        // Provenance sections are accepted.
        CHECK_NOTHROW(ExperimentConfig::parse("level: 3\n[run]\nversion: 1.0.0\n[result]\nstages: 4\n"));
    }

    TEST_CASE("audit selection")
    {
        AuditConfig a;
        for (const auto& name : audit_names())
            CHECK(a.selected(name));
        a.select = {"identity"};
        CHECK(a.selected("identity"));
        CHECK_FALSE(a.selected("signorini"));
    }

    TEST_CASE("solve writes a reproducible field and provenance")
    {
        const auto dir = scratch_dir();
        const auto cfg = small_barrier();
        std::ostringstream out;
        CHECK(cmd_solve(cfg, dir / "a.toff", out, "test") == kSuccess);
        CHECK(cmd_solve(cfg, dir / "b.toff", out, "test") == kSuccess);
        CHECK(slurp(dir / "a.toff") == slurp(dir / "b.toff"));
        CHECK(fs::exists(dir / "a.toff.gamma"));
        CHECK(out.str().find("coincidence_fraction") != std::string::npos);

        const Record prov = Record::load(provenance_path(dir / "a.toff"));
        CHECK(prov.get("run.digest") == file_digest(dir / "a.toff"));
        CHECK(ExperimentConfig::load(provenance_path(dir / "a.toff")) == cfg);

        const auto loaded = load_solution(dir / "a.toff");
        CHECK(loaded.has_config);
        CHECK(loaded.epsilon_final == prov.number("result.epsilon_final"));
        CHECK(loaded.lipschitz == prov.number("result.lipschitz"));
        fs::remove_all(dir);
    }

    TEST_CASE("constant datum solves trivially")
    {
        ExperimentConfig cfg;
        cfg.level = 3;
        cfg.datum = BoundaryDatum::make_constant(1.0);
        const auto s = solve_experiment(cfg);
        CHECK(s.lambda.empty());
        CHECK(s.gamma.empty());
        CHECK(s.summary.number("result.coincidence_fraction") == 0.0);
        CHECK(s.seconds < 5.0);
    }

    TEST_CASE("audit exit codes")
    {
        const auto dir = scratch_dir();
        std::ostringstream out;
        REQUIRE(cmd_solve(small_barrier(), dir / "f.toff", out, "test") == kSuccess);

        AuditRequest req;
        req.field = dir / "f.toff";
        req.select = {"signorini", "coincidence", "stationarity"};
        std::ostringstream report;
        CHECK(cmd_audit(req, report, "test") == kSuccess);
        const Record rec = Record::parse(report.str());
        CHECK(rec.get("verdict.pass") == "yes");
        CHECK_FALSE(rec.has("identity.worst"));

        std::ofstream(dir / "strict.cfg") << "[audit]\nstationarity: 1e-14\n";
        req.config = dir / "strict.cfg";
        std::ostringstream strict;
        CHECK(cmd_audit(req, strict, "test") == kAuditFailure);
        CHECK(Record::parse(strict.str()).get("verdict.failed") == "stationarity");

        // A field whose digest no longer matches its sidecar is refused.
        std::ofstream(dir / "f.toff", std::ios::app) << 'x';
        CHECK_THROWS(load_solution(dir / "f.toff"));
        fs::remove_all(dir);
    }

    TEST_CASE("frequency table")
    {
        const auto dir = scratch_dir();
        std::ostringstream out;
        REQUIRE(cmd_solve(small_barrier(), dir / "f.toff", out, "test") == kSuccess);
        FrequencyRequest req;
        req.field = dir / "f.toff";
        req.centers = {"0", "gamma"};
        req.radii = {0.2, 0.4};
        std::ostringstream table;
        CHECK(cmd_frequency(req, table, "test") == kSuccess);
        int rows = 0;
        std::istringstream is(table.str());
        for (std::string line; std::getline(is, line);)
            rows += !line.empty() && line[0] != '#';
        CHECK(rows == 2 * 3); // origin plus two gamma points
        fs::remove_all(dir);
    }

    TEST_CASE("centers and radii")
    {
        CHECK(parse_center("0.25", 1) == Point(0.25, 0, 0));
        CHECK(parse_center("0.1,-0.2", 2) == Point(0.1, -0.2, 0));
        CHECK_THROWS_AS(parse_center("0.1,0.2", 1), InvalidArgument);
        CHECK_THROWS_AS(parse_center("abc", 1), InvalidArgument);
        auto mesh = Mesh::half_ball(1, 5);
        const auto radii = dyadic_radii(*mesh);
        REQUIRE(!radii.empty());
        CHECK(radii.front() == doctest::Approx(0.4));
        CHECK(radii.back() >= trusted_radius(*mesh));
    }

    TEST_CASE("manifest parsing")
    {
        const auto dir = scratch_dir();
        std::ofstream(dir / "m.txt") << "n: 1\nlevel: 3\nbaseline: base_{level}.txt\n"
                                        "[experiments]\nb: barrier a=1 lift=0.5\n"
                                        "[pairs]\nb: above barrier a=1 lift=0.6\n"
                                        "[tolerances]\nstages: 0\n";
        const auto m = Manifest::load(dir / "m.txt");
        CHECK(m.level == 3);
        CHECK(m.baseline == dir / "base_3.txt");
        REQUIRE(m.pairs.size() == 1);
        CHECK(m.pairs[0].upper == BoundaryDatum::make_barrier(1.0, 0.6));
        CHECK(Manifest::load(dir / "m.txt", 4).baseline == dir / "base_4.txt");

        std::ofstream(dir / "bad.txt") << "level: 3\ncolour: red\n[experiments]\nb: constant c=1\n";
        CHECK_THROWS_AS(Manifest::load(dir / "bad.txt"), FormatError);
        std::ofstream(dir / "orphan.txt") << "[experiments]\nb: constant c=1\n[pairs]\nz: above constant c=2\n";
        CHECK_THROWS_AS(Manifest::load(dir / "orphan.txt"), FormatError);
        fs::remove_all(dir);
    }

    TEST_CASE("corpus drift detection")
    {
        const auto dir = scratch_dir();
        std::ofstream(dir / "m.txt") << "n: 1\nlevel: 3\naudits: signorini coincidence\n"
                                        "[experiments]\nb: barrier a=1 lift=0.5\nc: constant c=1\n"
                                        "[pairs]\nb: above barrier a=1 lift=0.6\n"
                                        "[tolerances]\nresult.stages: 0\nresult.newton_iterations: 0\nresult.h1_norm: 1e-12\n";
        CorpusOptions opts;
        std::ostringstream out;
        CHECK_THROWS_AS(cmd_corpus(dir / "m.txt", opts, out, "test"), InvalidArgument);
        opts.update_baseline = true;
        CHECK(cmd_corpus(dir / "m.txt", opts, out, "test") == kSuccess);
        opts.update_baseline = false;
        std::ostringstream again;
        CHECK(cmd_corpus(dir / "m.txt", opts, again, "test") == kSuccess);
        CHECK(Record::parse(again.str()).number("baseline.worst_relative_drift") == 0.0);
        opts.newton_tolerance = 1e-4;
        std::ostringstream loose;
        CHECK(cmd_corpus(dir / "m.txt", opts, loose, "test") == kAuditFailure);
        fs::remove_all(dir);
    }

    TEST_CASE("thread cap")
    {
        ::setenv("THINSHIELD_THREADS", "1", 1);
        CHECK(worker_count(8, 5) == 1);
        ::unsetenv("THINSHIELD_THREADS");
        CHECK(worker_count(3, 5) == 3);
        CHECK(worker_count(8, 2) == 2);
        CHECK(worker_count(0, 4) >= 1);
    }
}
