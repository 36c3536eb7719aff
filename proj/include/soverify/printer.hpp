// Rendering of terms, formulas and whole systems back into the .sospec
// s-expression syntax. print -> parse is the identity on parsed input.

#pragma once

#include <string>

#include "soverify/logic.hpp"

namespace soverify {

struct TwoLevelSystem;
struct Scenario;
struct InvariantTask;
struct SpecFile;

std::string print_term(const Signature& sig, const TermPtr& t);
std::string print_formula(const Signature& sig, const FormulaPtr& f);

// Multi-line canonical layout used by `soverify fmt` and the golden tests.
std::string print_system(const TwoLevelSystem& sys);
std::string print_spec_file(const SpecFile& file);

} // namespace soverify
