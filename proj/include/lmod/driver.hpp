// Pipeline plumbing shared by the command-line tool and the test suites:
// search-path file loading, cached loaders, and end-to-end helpers.
#pragma once

#include <filesystem>
#include <map>
#include <memory>

#include "lmod/interp.hpp"
#include "lmod/link.hpp"
#include "lmod/parser.hpp"
#include "lmod/vm.hpp"

namespace lmod {

std::string read_text_file(const std::filesystem::path& p);
std::vector<uint8_t> read_binary_file(const std::filesystem::path& p);
void write_binary_file(const std::filesystem::path& p, const std::vector<uint8_t>& bytes);

// First match wins across the search directories.
std::filesystem::path find_in_path(const std::string& fileName,
                                   const std::vector<std::filesystem::path>& dirs,
                                   Position pos, Errc missing);

SourceLoader make_source_loader(std::vector<std::filesystem::path> dirs);

// Loads and decodes <name>.lmo files, caching by module name.
class ObjectCache {
public:
    explicit ObjectCache(std::vector<std::filesystem::path> dirs) : dirs_(std::move(dirs)) {}
    const ObjectFile& get(const std::string& name, Position pos);
    ObjectLoader loader();

    // Pre-seeded in-memory objects (used by verify and tests).
    void put(const std::string& name, ObjectFile obj);

private:
    std::vector<std::filesystem::path> dirs_;
    std::map<std::string, ObjectFile> cache_;
};

// In-memory corpus loader for tests: name -> file text.
SourceLoader memory_source_loader(std::shared_ptr<std::map<std::string, std::string>> files);

// Parses, checks and solves a goal against a flattened program.
std::vector<Answer> interp_answers(const FlatProgram& fp, const std::string& goalText,
                                   SolveOptions opts = {}, size_t maxAnswers = SIZE_MAX);

// Parses, checks, compiles and runs a goal against an image.
std::vector<Answer> vm_answers(const Image& img, const std::string& goalText,
                               MachineOptions opts = {}, size_t maxAnswers = SIZE_MAX);

}  // namespace lmod
