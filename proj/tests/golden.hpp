// Copyright 2026 The CBF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Hand-built scenes with known reasoning outcomes. Prediction grids use the
// class letters of support.hpp (lowercase = low confidence); the expected
// values were worked out by hand from the rule tables.

#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "support.hpp"

namespace cbf::test {

struct GoldenIntra {
  std::string rule;
  std::vector<std::string_view> pred;
  std::vector<std::string_view> truth;
};

inline const std::vector<GoldenIntra>& golden_intra() {
  static const std::vector<GoldenIntra> scenes = {
      {"r1",
       {"GGGGGGG", "GGGGGGG", "GGvvvGG", "GGvvvGG", "GGvvvGG", "GGGGGGG", "PPPPPPP"},
       {"GGGGGGG", "GGGGGGG", "GGGGGGG", "GGGGGGG", "GGGGGGG", "GGGGGGG", "PPPPPPP"}},
      {"r2",
       {"BBPPPPP", "BBPPPPP", "PPPggPP", "PPPggPP", "PPPPPPP", "PPPPPPP", "PPPPPPP"},
       {"BBPPPPP", "BBPPPPP", "PPPPPPP", "PPPPPPP", "PPPPPPP", "PPPPPPP", "PPPPPPP"}},
      {"r3",
       {"WWWWWWW", "WWWWWWW", "WWbbWWW", "WWbbWWW", "WWWWWWW", "GGGGGGG"},
       {"WWWWWWW", "WWWWWWW", "WWWWWWW", "WWWWWWW", "WWWWWWW", "GGGGGGG"}},
      {"r4",
       {"VVVVVVV", "VVwwwVV", "VVwwwVV", "VVVVVVV", "PPPPPPP"},
       {"VVVVVVV", "VVVVVVV", "VVVVVVV", "VVVVVVV", "PPPPPPP"}},
      {"r5",
       {"BBBBBBB", "BBaaaBB", "BBaaaBB", "BBBBBBB", "GGGGGGG"},
       {"BBBBBBB", "BBBBBBB", "BBBBBBB", "BBBBBBB", "GGGGGGG"}},
      {"r6",
       {"VVVVVV", "VVccVV", "VVVVVV", "WWWWWW"},
       {"VVVVVV", "VVVVVV", "VVVVVV", "WWWWWW"}},
      {"r7",
       {"GGGGGGG", "GGaaaGG", "GGaaaGG", "GGGGGGG", "VVVVVVV"},
       {"GGGGGGG", "GGGGGGG", "GGGGGGG", "GGGGGGG", "VVVVVVV"}},
      {"r8",
       {"GGGGGBB", "GccGGBB", "GccGGGG", "GGGGGGG"},
       {"GGGGGBB", "GGGGGBB", "GGGGGGG", "GGGGGGG"}},
      {"r9",
       {"VVVVVV", "VVssVV", "VVVVVV", "GGGGGG"},
       {"VVVVVV", "VVVVVV", "VVVVVV", "GGGGGG"}},
  };
  return scenes;
}

struct GoldenExtra {
  std::string rule;
  std::vector<std::string_view> pred;
  std::vector<std::string_view> shadow;     // '-', '0', '+'
  std::vector<std::string_view> elevation;  // '0', '1', '2'
};

inline const std::vector<GoldenExtra>& golden_extra() {
  static const std::vector<GoldenExtra> scenes = {
      {"e1",
       {"GGGGGG", "GBBwwG", "GBBwwG", "GGGGGG"},
       {"000000", "0--++0", "0--++0", "000000"},
       {"000000", "022000", "022000", "000000"}},
      {"e2",
       {"PPPPP", "PccPP", "PPPPP", "WWWWW"},
       {"00000", "0--00", "00000", "00000"},
       {"00000", "00000", "00000", "00000"}},
      {"e3",
       {"PPPPP", "PGGGP", "PGGGP", "PPPPP"},
       {"00000", "0---0", "0---0", "00000"},
       {"00000", "00000", "00000", "00000"}},
      {"e4",
       {"PPPPP", "PBBPP", "PBBPP", "PPPPP"},
       {"00000", "0--00", "0--00", "00000"},
       {"00000", "02200", "02200", "00000"}},
      {"e5",
       {"VVVV", "VWWV", "VVVV"},
       {"0000", "0000", "0000"},
       {"0000", "0000", "0000"}},
      {"e6",
       {"PPPPP", "PCCPP", "PPPPP"},
       {"00000", "00000", "00000"},
       {"00000", "01100", "00000"}},
      {"e7",
       {"VVVVV", "VBBBV", "VVVVV"},
       {"00000", "0---0", "00000"},
       {"00000", "02220", "00000"}},
  };
  return scenes;
}

inline Grid grid_of(const std::vector<std::string_view>& rows) {
  Grid g;
  g.height = int(rows.size());
  for (auto row : rows) {
    g.width = int(row.size());
    for (char c : row) {
      g.labels.push_back(class_of(c));
      g.conf.push_back(c >= 'a' && c <= 'z' ? 0.45f : 0.9f);
    }
  }
  return g;
}

inline std::vector<std::int8_t> channel_of(const std::vector<std::string_view>& rows) {
  std::vector<std::int8_t> v;
  for (auto row : rows)
    for (char c : row) v.push_back(c == '-' ? -1 : c == '+' ? 1 : std::int8_t(c - '0'));
  return v;
}

}  // namespace cbf::test
