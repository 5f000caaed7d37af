#pragma once

#include <string>
#include <utility>
#include <vector>

namespace iwa {

enum class Status { Pass, Fail, Error, Skipped };

const char* status_name(Status s);

struct CheckRecord {
    std::string id;
    std::string anchor;
    std::vector<std::pair<std::string, std::string>> params;
    Status status = Status::Pass;
    std::string value;
    std::string witness;
    double elapsed_ms = 0.0;

    bool ok() const { return status == Status::Pass || status == Status::Skipped; }
};

struct Report {
    std::string suite;
    std::vector<CheckRecord> records;

    bool passed() const;
    std::size_t failures() const;
    CheckRecord& add(std::string id, std::string anchor, bool pass, std::string value = {},
                     std::string witness = {});
    void merge(const Report& other);
    // First failing record, or nullptr.
    const CheckRecord* first_failure() const;
};

}  // namespace iwa
