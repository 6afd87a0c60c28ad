#ifndef SENTVEC_RENDER_H_
#define SENTVEC_RENDER_H_

#include <string>
#include <string_view>

#include "sentvec/runner.h"

namespace sentvec {

// Accuracy as a percentage with 2 decimals, Pearson with 3.
std::string format_cell(Measure measure, double value);

// method,task,measure,value,n with values at 6 decimals.
std::string render_csv(const ResultMatrix& m);
std::string render_json(const ResultMatrix& m);
// Methods as rows, tasks as columns.
std::string render_markdown(const ResultMatrix& m);
// Bar chart of all methods on one task.
std::string render_bar_svg(const ResultMatrix& m, std::size_t task);

// dim,method,task,measure,value,n
std::string render_sweep_csv(const SweepResult& s);
// Value against dimension, one line per method.
std::string render_sweep_svg(const SweepResult& s, std::size_t task);

// Task name reduced to [A-Za-z0-9._-] for file names.
std::string file_stem(std::string_view name);

}  // namespace sentvec

#endif  // SENTVEC_RENDER_H_
