// lmc — compiler, linker, emulator and reference interpreter for the
// module-structured logic language. See README.md for the command set.
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "lmod/driver.hpp"

namespace fs = std::filesystem;
using namespace lmod;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoAnswer = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCompile = 3;
constexpr int kExitLink = 4;
constexpr int kExitVerify = 5;

std::vector<fs::path> search_dirs(const std::vector<std::string>& pathFlags) {
    std::vector<fs::path> dirs;
    auto addColonSeparated = [&](const std::string& s) {
        size_t start = 0;
        while (start <= s.size()) {
            size_t colon = s.find(':', start);
            std::string part =
                colon == std::string::npos ? s.substr(start) : s.substr(start, colon - start);
            if (!part.empty()) dirs.emplace_back(part);
            if (colon == std::string::npos) break;
            start = colon + 1;
        }
    };
    for (auto& p : pathFlags) addColonSeparated(p);
    if (const char* env = std::getenv("LP_PATH")) addColonSeparated(env);
    dirs.emplace_back(".");
    return dirs;
}

int classify_error(const Error& e) {
    switch (e.code()) {
        case Errc::CyclicAccumulation:
        case Errc::MissingObjectFile:
        case Errc::SignatureSkew:
        case Errc::RenamingDomainMismatch:
        case Errc::MergeClosedDefinition:
        case Errc::BadMagic:
        case Errc::UnsupportedVersion:
        case Errc::Truncated:
        case Errc::IndexOutOfRange:
        case Errc::BadFormat:
            return kExitLink;
        default:
            return kExitCompile;
    }
}

// Streams answers; interactive mode asks for ';' to continue.
template <typename Next>
int stream_answers(bool batch, Next next) {
    size_t count = 0;
    for (;;) {
        std::optional<Answer> a = next();
        if (!a) break;
        ++count;
        std::cout << show_answer(*a) << "\n\n" << std::flush;
        if (!batch) {
            std::cerr << "more? (;) " << std::flush;
            std::string line;
            if (!std::getline(std::cin, line)) break;
            if (line.empty() || line[0] != ';') break;
        }
    }
    if (count == 0) {
        std::cout << "no\n";
        return kExitNoAnswer;
    }
    return kExitOk;
}

struct GraphPipeline {
    ModuleGraph graph;

    explicit GraphPipeline(const std::string& root, const std::vector<fs::path>& dirs)
        : graph(resolve_graph(root, make_source_loader(dirs))) {
        for (auto& w : graph.diamondWarnings)
            std::cerr << "warning: module '" << w
                      << "' is accumulated along several paths; each accumulation "
                         "gets a private copy\n";
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"separate-compilation toolchain for a module-structured logic language"};
    app.require_subcommand(1);

    std::vector<std::string> pathFlags;
    app.add_option("--path", pathFlags, "module search path (repeatable, colon-separated)");

    std::string module, goal, file, output;
    bool batch = false, debugNames = false, noOccurs = false;
    unsigned depth = 0;

    auto* cmdCheck = app.add_subcommand("check", "parse and typecheck a module graph");
    cmdCheck->add_option("module", module)->required();

    auto* cmdCompile = app.add_subcommand("compile", "compile one module to a .lmo file");
    cmdCompile->add_option("module", module)->required();
    cmdCompile->add_option("-o,--output", output, "output file (default <module>.lmo)");
    cmdCompile->add_flag("--debug-names", debugNames, "keep local constant names");

    auto* cmdLink = app.add_subcommand("link", "link object files into a .lmx image");
    cmdLink->add_option("module", module)->required();
    cmdLink->add_option("-o,--output", output, "output file (default <module>.lmx)");

    auto* cmdRun = app.add_subcommand("run", "run a goal against a linked image");
    cmdRun->add_option("image", file)->required();
    cmdRun->add_option("goal", goal)->required();
    cmdRun->add_flag("--batch", batch, "print all answers non-interactively");
    cmdRun->add_option("--depth", depth, "choice-point limit");
    cmdRun->add_flag("--no-occurs", noOccurs, "disable the occurs check");

    auto* cmdInterp = app.add_subcommand("interp", "run a goal on the reference interpreter");
    cmdInterp->add_option("module", module)->required();
    cmdInterp->add_option("goal", goal)->required();
    cmdInterp->add_flag("--batch", batch, "print all answers non-interactively");
    cmdInterp->add_option("--depth", depth, "recursion depth limit");

    auto* cmdDisasm = app.add_subcommand("disasm", "list a .lmo or .lmx file");
    cmdDisasm->add_option("file", file)->required();

    auto* cmdVerify =
        app.add_subcommand("verify", "compare separate compilation+link against "
                                     "whole-program compilation, byte for byte");
    cmdVerify->add_option("module", module)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    std::vector<fs::path> dirs = search_dirs(pathFlags);

    try {
        if (cmdCheck->parsed()) {
            GraphPipeline p(module, dirs);
            std::cerr << "ok: " << p.graph.nodes.size() << " module(s)\n";
            return kExitOk;
        }

        if (cmdCompile->parsed()) {
            SourceLoader loader = make_source_loader(dirs);
            ModuleAst ast = loader.module(module, {});
            // Separate compilation: only signatures of accumulated modules
            // are consulted, never their sources.
            std::map<std::string, CheckedSignature> sigs;
            std::vector<std::string> sigStack;
            std::function<const CheckedSignature&(const std::string&, Position)> checkedSig =
                [&](const std::string& n, Position pos) -> const CheckedSignature& {
                auto it = sigs.find(n);
                if (it != sigs.end()) return it->second;
                if (std::find(sigStack.begin(), sigStack.end(), n) != sigStack.end())
                    fail(Errc::CyclicAccumulation, "cyclic signature inclusion at '" + n + "'",
                         pos);
                sigStack.push_back(n);
                CheckedSignature cs = check_signature(loader.signature(n, pos), checkedSig);
                sigStack.pop_back();
                return sigs.emplace(n, std::move(cs)).first->second;
            };
            const CheckedSignature& own = checkedSig(module, {});
            std::vector<CheckedSignature> accSigs;
            for (auto& a : ast.accumulates) accSigs.push_back(checkedSig(a, {}));
            TypedModule tm = check_module(ast, own, accSigs, checkedSig);
            ObjectFile obj = compile_module(tm, debugNames);
            fs::path out = output.empty() ? fs::path(module + ".lmo") : fs::path(output);
            write_binary_file(out, encode(obj));
            std::cerr << "wrote " << out.string() << "\n";
            return kExitOk;
        }

        if (cmdLink->parsed()) {
            ObjectCache cache(dirs);
            LinkResult lr = link(module, cache.loader());
            fs::path out = output.empty() ? fs::path(module + ".lmx") : fs::path(output);
            write_binary_file(out, encode(lr.image));
            std::cerr << "wrote " << out.string() << "\n";
            return kExitOk;
        }

        if (cmdRun->parsed()) {
            Image img = decode_image(read_binary_file(file));
            ParsedGoal pg = parse_goal(goal);
            SymbolTable table = image_symbol_table(img);
            CheckedGoal cg = check_goal(pg.goal, pg.freeVars, table);
            MachineOptions mo;
            mo.occursCheck = !noOccurs;
            mo.depthLimit = depth;
            Machine m(img, mo);
            m.start(compile_goal(img, cg));
            Machine::Status st = m.run_to_answer();
            return stream_answers(batch, [&]() -> std::optional<Answer> {
                if (st != Machine::Status::Answer) return std::nullopt;
                Answer a = m.current_answer();
                st = m.next_answer();
                return a;
            });
        }

        if (cmdInterp->parsed()) {
            GraphPipeline p(module, dirs);
            FlatProgram fp = flatten_graph(p.graph);
            ParsedGoal pg = parse_goal(goal);
            CheckedGoal cg = check_goal(pg.goal, pg.freeVars, fp.rootTable);
            SolveOptions so;
            so.depthLimit = static_cast<int>(depth);
            Interp engine(fp, so);

            if (batch) {
                std::vector<Answer> all = engine.solve_all(cg);
                size_t i = 0;
                return stream_answers(true, [&]() -> std::optional<Answer> {
                    if (i >= all.size()) return std::nullopt;
                    return all[i++];
                });
            }
            // Interactive: the sink blocks on the continuation prompt.
            size_t count = 0;
            bool wantMore = true;
            engine.solve(cg, [&](const Answer& a) {
                ++count;
                std::cout << show_answer(a) << "\n\n" << std::flush;
                std::cerr << "more? (;) " << std::flush;
                std::string line;
                if (!std::getline(std::cin, line) || line.empty() || line[0] != ';') {
                    wantMore = false;
                    return false;
                }
                return true;
            });
            (void)wantMore;
            if (count == 0) {
                std::cout << "no\n";
                return kExitNoAnswer;
            }
            return kExitOk;
        }

        if (cmdDisasm->parsed()) {
            std::vector<uint8_t> bytes = read_binary_file(file);
            if (bytes.size() >= 4 && bytes[0] == 'L' && bytes[1] == 'M' && bytes[2] == 'X') {
                std::cout << disassemble(decode_image(bytes));
            } else {
                std::cout << disassemble(decode_object(bytes));
            }
            return kExitOk;
        }

        if (cmdVerify->parsed()) {
            GraphPipeline p(module, dirs);
            VerifyResult vr = verify_graph(p.graph);
            if (vr.identical) {
                std::cout << "IDENTICAL (" << vr.linkedSize << " bytes)\n";
                return kExitOk;
            }
            std::cout << "DIFFER at offset " << vr.firstDiff << " (linked " << vr.linkedSize
                      << " bytes, inlined " << vr.inlinedSize << " bytes)\n";
            return kExitVerify;
        }
    } catch (const Error& e) {
        std::cerr << (module.empty() ? file : module) << ": " << e.render() << "\n";
        return classify_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCompile;
    }
    return kExitUsage;
}
