#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "iwa/errors.hpp"
#include "iwa/valmat.hpp"
#include "suites.hpp"

namespace {

using namespace iwa;
using namespace iwa::tools;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<int> parse_alpha(const std::string& s) {
    std::vector<int> out;
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, ',')) {
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ParseError("bad multi-index '" + s + "'");
        }
        if (out.back() < 0) throw ParseError("negative entry in multi-index '" + s + "'");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Computations and verification suites for Iwasawa algebras of Z_p^d x| Z_p"};
    app.require_subcommand(1);

    SuiteConfig cfg;
    std::string format = "text";
    int precision = 0, m1 = -1, cap = -1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--precision", precision, "p-adic precision in digits (overrides the descriptor)")
            ->check(CLI::Range(1, 60));
        sub->add_option("--truncation", cfg.truncation, "total-degree truncation T")->check(CLI::Range(1, 64));
        sub->add_option("--m1", m1, "initial power to use (at least the computed one)")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--mahler-cap", cap, "degree cap for Mahler expansions (default T - 1)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--format", format, "output format")->check(CLI::IsMember({"text", "json"}));
    };

    std::string file, suite, table, alpha_text, instance;
    int table_m = -1;

    auto* gc = app.add_subcommand("group-check", "summarize a group descriptor");
    gc->add_option("file", file, "group descriptor file")->required();
    add_common(gc);

    auto* va = app.add_subcommand("verify-all", "run every verification suite");
    va->add_option("file", file, "group descriptor file")->required();
    va->add_option("--suite", suite, "run only this suite")->check(CLI::IsMember(suite_names()));
    add_common(va);

    auto* tb = app.add_subcommand("table", "print a computed table");
    tb->add_option("what", table, "mahler-coeffs | lazard-values | growth | kbasis")
        ->required()
        ->check(CLI::IsMember({"mahler-coeffs", "lazard-values", "growth", "kbasis"}));
    tb->add_option("file", file, "group descriptor file")->required();
    tb->add_option("--alpha", alpha_text, "single multi-index for mahler-coeffs, e.g. 1,0");
    tb->add_option("--m", table_m, "level m for mahler-coeffs")->check(CLI::NonNegativeNumber);
    add_common(tb);

    auto* el = app.add_subcommand("eliminate", "run the elimination harness on an instance file");
    el->add_option("instance", instance, "elimination instance file")->required();
    el->add_option("--format", format, "output format")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (precision > 0) cfg.precision = precision;
    if (m1 >= 0) cfg.m1 = m1;
    if (cap >= 0) cfg.mahler_cap = cap;

    try {
        if (*el) {
            EliminationInstance inst = EliminationInstance::parse(read_file(instance));
            EliminationResult res = elimination_harness(inst);
            res.report.suite = "elimination";
            GroupDescriptor none;
            none.p = inst.F->p();
            none.d = 0;
            const std::vector<Report> reps{res.report};
            std::cout << (format == "json" ? format_json(reps, none, cfg) : format_text(reps, none, cfg));
            return res.report.passed() ? 0 : 1;
        }

        GroupDescriptor desc = GroupDescriptor::parse(read_file(file));

        if (*gc) {
            GroupCheck chk = group_check(desc, cfg);
            if (format == "json") {
                std::cout << format_json({chk.report}, desc, cfg);
            } else {
                std::cout << "# iwa-group-check v" << kReportVersion << "\n";
                std::cout << "abelian        " << (chk.abelian ? "true" : "false") << "\n";
                std::cout << "split          " << (chk.lattice_split ? "true" : "false") << "\n";
                std::cout << "uniform level  c = " << chk.uniform_level << "\n";
                std::cout << "initial power  "
                          << (chk.initial_power ? "m1 = " + std::to_string(*chk.initial_power) : std::string("-"))
                          << "\n";
                std::cout << "Z(G) basis    ";
                if (chk.z_basis.empty()) std::cout << " (trivial)";
                for (const auto& z : chk.z_basis) std::cout << " " << z;
                std::cout << "\n";
                if (chk.abelian) std::cout << "downstream suites skipped for an abelian group\n";
                std::cout << format_text({chk.report}, desc, cfg);
            }
            return chk.report.passed() ? 0 : 1;
        }

        if (*va) {
            auto reports = verify_all(desc, cfg, suite.empty() ? std::nullopt : std::optional<std::string>(suite));
            std::cout << (format == "json" ? format_json(reports, desc, cfg) : format_text(reports, desc, cfg));
            return all_passed(reports) ? 0 : 1;
        }

        if (*tb) {
            TableOptions opt;
            if (!alpha_text.empty()) opt.alpha = parse_alpha(alpha_text);
            if (table_m >= 0) opt.m = table_m;
            Table t = make_table(table, desc, cfg, opt);
            std::cout << (format == "json" ? format_table_json(t) : format_table_text(t));
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
