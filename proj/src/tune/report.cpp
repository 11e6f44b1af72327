#include <array>
#include <cmath>
#include <cstdio>
#include <optional>

#include "lmprep/metrics/metrics.hpp"
#include "lmprep/tune/tune.hpp"

namespace lmprep::tune {

namespace {

constexpr std::array<Task, 3> kTaskOrder = {Task::BMC, Task::NEMO, Task::SMCD};

struct Row {
    const ModelResults* model = nullptr;
    // all five cells as display percentages
    std::array<std::optional<double>, 5> cells; // BMC, NEMO, NER-AVG, SMCD, AVG
};

Row build_row(const ModelResults& model) {
    Row row;
    row.model = &model;
    auto score = [&](Task task) -> std::optional<double> {
        auto it = model.test_scores.find(task);
        if (it == model.test_scores.end()) return std::nullopt;
        return it->second * 100.0;
    };
    row.cells[0] = score(Task::BMC);
    row.cells[1] = score(Task::NEMO);
    row.cells[3] = score(Task::SMCD);
    if (row.cells[0] && row.cells[1]) {
        std::vector<double> ner = {*row.cells[0], *row.cells[1]};
        row.cells[2] = metrics::unweighted_mean(ner);
    }
    if (row.cells[0] && row.cells[1] && row.cells[3]) {
        std::vector<double> all = {*row.cells[0], *row.cells[1], *row.cells[3]};
        row.cells[4] = metrics::unweighted_mean(all);
    }
    return row;
}

std::string fmt2(double value) {
    // round in decimal space before printing: a mean of already-rounded
    // percentages can sit a hair below the half (90.195 would print as
    // 90.19 straight through printf)
    double rounded = std::round(value * 100.0) / 100.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", rounded);
    return buf;
}

std::string format_lr(double lr) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", lr);
    std::string out = buf;
    // %g prints 5e-05; drop the exponent's leading zero
    size_t e = out.find('e');
    if (e != std::string::npos && e + 2 < out.size() && out[e + 2] == '0') out.erase(e + 2, 1);
    return out;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

// rank annotations per column within a size class: 0 = best, 1 = runner-up
int rank_in_class(const std::vector<Row>& rows, size_t row_index, size_t column) {
    const Row& self = rows[row_index];
    if (!self.cells[column]) return -1;
    double value = *self.cells[column];
    double best = -1.0, second = -1.0;
    for (const Row& row : rows) {
        if (row.model->size_class != self.model->size_class || !row.cells[column]) continue;
        double v = *row.cells[column];
        if (v > best) {
            second = best;
            best = v;
        } else if (v < best && v > second) {
            second = v;
        }
    }
    if (value == best) return 0;
    if (value == second) return 1;
    return -1;
}

std::string winner_cell(const ModelResults& model, Task task, bool batch_part,
                        const char* missing) {
    auto it = model.winners.find(task);
    if (it == model.winners.end()) return missing;
    return batch_part ? std::to_string(it->second.first) : format_lr(it->second.second);
}

} // namespace

std::string render_report_csv(const std::vector<ModelResults>& rows) {
    std::string out = "model,BMC,NEMO,AVG_NER,SMCD,AVG\n";
    for (const ModelResults& model : rows) {
        Row row = build_row(model);
        out += csv_field(model.model);
        for (const auto& cell : row.cells) {
            out += ',';
            if (cell) out += fmt2(*cell);
        }
        out += '\n';
    }
    out += '\n';
    out += "model,BMC_BS,BMC_LR,NEMO_BS,NEMO_LR,SMCD_BS,SMCD_LR\n";
    for (const ModelResults& model : rows) {
        out += csv_field(model.model);
        for (Task task : kTaskOrder) {
            out += ',';
            out += winner_cell(model, task, true, "");
            out += ',';
            out += winner_cell(model, task, false, "");
        }
        out += '\n';
    }
    return out;
}

std::string render_report_md(const std::vector<ModelResults>& models) {
    std::vector<Row> rows;
    rows.reserve(models.size());
    for (const ModelResults& model : models) rows.push_back(build_row(model));

    std::string out = "| Model | BMC | NEMO | AVG (NER) | SMCD | AVG |\n"
                      "|---|---|---|---|---|---|\n";
    for (size_t r = 0; r < rows.size(); ++r) {
        out += "| " + models[r].model + " |";
        for (size_t c = 0; c < rows[r].cells.size(); ++c) {
            out += ' ';
            if (!rows[r].cells[c]) {
                out += '-';
            } else {
                std::string text = fmt2(*rows[r].cells[c]);
                int rank = rank_in_class(rows, r, c);
                if (rank == 0)
                    text = "**" + text + "**";
                else if (rank == 1)
                    text = "<u>" + text + "</u>";
                out += text;
            }
            out += " |";
        }
        out += '\n';
    }

    out += "\n| Model | BMC BS | BMC LR | NEMO BS | NEMO LR | SMCD BS | SMCD LR |\n"
           "|---|---|---|---|---|---|---|\n";
    for (const ModelResults& model : models) {
        out += "| " + model.model + " |";
        for (Task task : kTaskOrder) {
            out += ' ' + winner_cell(model, task, true, "-") + " |";
            out += ' ' + winner_cell(model, task, false, "-") + " |";
        }
        out += '\n';
    }
    return out;
}

} // namespace lmprep::tune
