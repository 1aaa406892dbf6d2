#pragma once

#include <functional>
#include <string>

#include "specpl/program.hpp"
#include "specpl/term.hpp"

namespace specpl {

// Maps a variable name to how it should appear in output. Identity by default.
using VarRename = std::function<std::string(const std::string&)>;

std::string term_to_string(const TermPtr& t);
std::string term_to_string(const TermPtr& t, const VarRename& rn);

std::string literal_to_string(const Literal& l);
std::string literal_to_string(const Literal& l, const VarRename& rn);

// anonymize_singletons: variables occurring exactly once in the clause print as "_".
std::string clause_to_string(const Clause& c, bool anonymize_singletons = false);
std::string procedure_to_string(const Procedure& p, bool anonymize_singletons = false);
std::string program_to_string(const Program& p, bool anonymize_singletons = false);

} // namespace specpl
