#include "asyrk/trace.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "asyrk/error.hpp"

namespace asyrk {

void Trace::validate() const {
    for (std::size_t k = 0; k < epochs.size(); ++k) {
        const auto& e = epochs[k];
        if (!(e.r_sq >= 0.0) || !(e.grad_sq >= 0.0)) {
            fail(ErrorCode::InvalidArgument,
                 "trace record " + std::to_string(k) + " has negative norms");
        }
        if (k > 0) {
            if (e.epoch_index <= epochs[k - 1].epoch_index) {
                fail(ErrorCode::InvalidArgument,
                     "epoch_index not strictly increasing at record " +
                         std::to_string(k));
            }
            if (e.updates_applied < epochs[k - 1].updates_applied) {
                fail(ErrorCode::InvalidArgument,
                     "updates_applied decreased at record " + std::to_string(k));
            }
        }
    }
}

std::string Trace::to_jsonl() const {
    std::ostringstream out;
    {
        nlohmann::json head;
        head["schema"] = 1;
        if (!config_echo.empty()) {
            head["config"] = nlohmann::json::parse(config_echo);
        } else {
            head["config"] = nlohmann::json::object();
        }
        out << head.dump() << '\n';
    }
    for (const auto& e : epochs) {
        nlohmann::json j;
        j["schema"] = 1;
        j["epoch_index"] = e.epoch_index;
        j["r_sq"] = e.r_sq;
        j["grad_sq"] = e.grad_sq;
        if (e.dist_sq) j["dist_sq"] = *e.dist_sq;
        j["wall_seconds"] = e.wall_seconds;
        j["updates_applied"] = e.updates_applied;
        out << j.dump() << '\n';
    }
    {
        nlohmann::json tail;
        tail["schema"] = 1;
        tail["final_x"] = final_x;
        out << tail.dump() << '\n';
    }
    return out.str();
}

Trace Trace::from_jsonl(const std::string& text) {
    Trace t;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(ErrorCode::IoError, std::string("bad trace line: ") + e.what());
        }
        if (!j.contains("schema") || j["schema"].get<int>() != 1) {
            fail(ErrorCode::IoError, "trace line missing schema: 1");
        }
        try {
            if (j.contains("config")) {
                t.config_echo = j["config"].dump();
            } else if (j.contains("final_x")) {
                t.final_x = j["final_x"].get<std::vector<double>>();
            } else {
                EpochRecord e;
                e.epoch_index = j.at("epoch_index").get<index_t>();
                e.r_sq = j.at("r_sq").get<double>();
                e.grad_sq = j.at("grad_sq").get<double>();
                if (j.contains("dist_sq")) e.dist_sq = j["dist_sq"].get<double>();
                e.wall_seconds = j.at("wall_seconds").get<double>();
                e.updates_applied = j.at("updates_applied").get<index_t>();
                t.epochs.push_back(e);
            }
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::IoError, std::string("bad trace line: ") + e.what());
        }
    }
    return t;
}

std::string Trace::to_csv() const {
    std::ostringstream out;
    out << "epoch_index,r_sq,grad_sq,dist_sq,wall_seconds,updates_applied\n";
    out.precision(17);
    for (const auto& e : epochs) {
        out << e.epoch_index << ',' << e.r_sq << ',' << e.grad_sq << ',';
        if (e.dist_sq) out << *e.dist_sq;
        out << ',' << e.wall_seconds << ',' << e.updates_applied << '\n';
    }
    return out.str();
}

} // namespace asyrk
