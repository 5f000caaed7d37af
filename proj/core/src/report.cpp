#include "iwa/report.hpp"

#include <algorithm>

namespace iwa {

const char* status_name(Status s) {
    switch (s) {
        case Status::Pass: return "pass";
        case Status::Fail: return "fail";
        case Status::Error: return "error";
        case Status::Skipped: return "skipped";
    }
    return "unknown";
}

bool Report::passed() const {
    return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.ok(); });
}

std::size_t Report::failures() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return !r.ok(); }));
}

CheckRecord& Report::add(std::string id, std::string anchor, bool pass, std::string value, std::string witness) {
    CheckRecord r;
    r.id = std::move(id);
    r.anchor = std::move(anchor);
    r.status = pass ? Status::Pass : Status::Fail;
    r.value = std::move(value);
    r.witness = std::move(witness);
    records.push_back(std::move(r));
    return records.back();
}

void Report::merge(const Report& other) {
    records.insert(records.end(), other.records.begin(), other.records.end());
}

const CheckRecord* Report::first_failure() const {
    for (const auto& r : records)
        if (!r.ok()) return &r;
    return nullptr;
}

}  // namespace iwa
