#include "lmod/driver.hpp"

#include <fstream>

namespace lmod {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(Errc::ModuleNotFound, "cannot open '" + p.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<uint8_t> read_binary_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(Errc::MissingObjectFile, "cannot open '" + p.string() + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

void write_binary_file(const fs::path& p, const std::vector<uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::BadFormat, "cannot write '" + p.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

fs::path find_in_path(const std::string& fileName, const std::vector<fs::path>& dirs,
                      Position pos, Errc missing) {
    for (auto& d : dirs) {
        fs::path p = d / fileName;
        std::error_code ec;
        if (fs::exists(p, ec)) return p;
    }
    fail(missing, "'" + fileName + "' not found on the search path", pos);
}

SourceLoader make_source_loader(std::vector<fs::path> dirs) {
    auto d = std::make_shared<std::vector<fs::path>>(std::move(dirs));
    SourceLoader l;
    l.module = [d](const std::string& name, Position pos) {
        fs::path p = find_in_path(name + ".mod", *d, pos, Errc::ModuleNotFound);
        return parse_module_text(read_text_file(p));
    };
    l.signature = [d](const std::string& name, Position pos) {
        fs::path p = find_in_path(name + ".sig", *d, pos, Errc::ModuleNotFound);
        return parse_signature_text(read_text_file(p));
    };
    return l;
}

const ObjectFile& ObjectCache::get(const std::string& name, Position pos) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    fs::path p = find_in_path(name + ".lmo", dirs_, pos, Errc::MissingObjectFile);
    ObjectFile obj = decode_object(read_binary_file(p));
    return cache_.emplace(name, std::move(obj)).first->second;
}

ObjectLoader ObjectCache::loader() {
    return [this](const std::string& name, Position pos) -> const ObjectFile& {
        return get(name, pos);
    };
}

void ObjectCache::put(const std::string& name, ObjectFile obj) {
    cache_.insert_or_assign(name, std::move(obj));
}

SourceLoader memory_source_loader(std::shared_ptr<std::map<std::string, std::string>> files) {
    SourceLoader l;
    l.module = [files](const std::string& name, Position pos) {
        auto it = files->find(name + ".mod");
        if (it == files->end())
            fail(Errc::ModuleNotFound, "module '" + name + "' not found", pos);
        return parse_module_text(it->second);
    };
    l.signature = [files](const std::string& name, Position pos) {
        auto it = files->find(name + ".sig");
        if (it == files->end())
            fail(Errc::ModuleNotFound, "signature '" + name + "' not found", pos);
        return parse_signature_text(it->second);
    };
    return l;
}

std::vector<Answer> interp_answers(const FlatProgram& fp, const std::string& goalText,
                                   SolveOptions opts, size_t maxAnswers) {
    ParsedGoal pg = parse_goal(goalText);
    CheckedGoal cg = check_goal(pg.goal, pg.freeVars, fp.rootTable);
    Interp engine(fp, opts);
    return engine.solve_all(cg, maxAnswers);
}

std::vector<Answer> vm_answers(const Image& img, const std::string& goalText,
                               MachineOptions opts, size_t maxAnswers) {
    ParsedGoal pg = parse_goal(goalText);
    SymbolTable table = image_symbol_table(img);
    CheckedGoal cg = check_goal(pg.goal, pg.freeVars, table);
    return run_all(img, cg, opts, maxAnswers);
}

}  // namespace lmod
