// Copyright 2026 The fusesim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fusesim {

/// floor(base / modulus) or base % modulus, with a sign when summed.
struct NonAffineAtom {
  enum class Kind { FloorDiv, Mod };
  Kind kind = Kind::FloorDiv;
  std::string base;
  int modulus = 2;
  int sign = 1;
  bool operator==(const NonAffineAtom&) const = default;
};

/// One index position of a variable reference: an affine part over the loop
/// indices plus any floor/mod atoms.
struct IndexExpr {
  enum class Kind { Affine, FloorDiv, Mod };

  std::map<std::string, int> coeffs;  // loop index -> coefficient, zeros dropped
  int offset = 0;
  std::vector<NonAffineAtom> atoms;
  std::string text;

  Kind kind() const;
  /// True for `own + constant`.
  bool is_unit_offset_of(const std::string& own) const;
  bool operator==(const IndexExpr&) const = default;
};

struct Term {
  std::string name;  // empty for an integer literal
  std::int64_t literal = 0;
  std::vector<IndexExpr> indices;
  bool bracketed = false;
  std::string text;
  int line = 0;
  int column = 0;
  bool is_literal() const { return name.empty(); }
};

struct Relation {
  std::string lhs;
  std::vector<std::string> lhs_indices;
  std::vector<Term> terms;
  std::vector<char> ops;  // '+' or '*' between consecutive terms
  int line = 0;
};

struct RecurrenceSystem {
  std::map<std::string, int> variables;  // name -> arity
  std::map<std::string, int> constants;
  std::vector<Relation> relations;
};

struct Witness {
  char condition = 'c';  // 'a' indexed, 'b' single assignment, 'c' constant offsets
  std::size_t relation = 0;
  std::string lhs;
  int term = -1;  // -1 when the violation is the relation itself
  std::string term_text;
  int dimension = -1;
  std::string reason;
};

struct RiaVerdict {
  bool single_assignment = true;
  bool indexed = true;
  bool constant_offsets = true;
  bool is_ria = true;
  std::vector<Witness> witnesses;
};

/// Throws ParseError (line/column) on syntax errors, undeclared variables,
/// arity mismatches and zero-offset self reads.
RecurrenceSystem parse_recurrences(std::string_view source);

RiaVerdict classify(const RecurrenceSystem& sys);

/// (relation, term) -> offset vector, or nullopt when not constant. Literal
/// terms are skipped.
using OffsetTable = std::map<std::pair<std::size_t, std::size_t>, std::optional<std::vector<int>>>;
OffsetTable offset_table(const RecurrenceSystem& sys);

/// Re-emits the system in DSL form.
std::string format_system(const RecurrenceSystem& sys);

}  // namespace fusesim
