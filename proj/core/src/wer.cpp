// Copyright 2026 The Phasecoder Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "phasecoder/qa.hpp"

namespace phasecoder {

namespace {

// Case-folded words; punctuation is dropped except intra-word apostrophes.
std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '\'') {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  // Trim bare apostrophes left over from quoting.
  for (auto& w : words) {
    while (!w.empty() && w.front() == '\'') w.erase(w.begin());
    while (!w.empty() && w.back() == '\'') w.pop_back();
  }
  std::erase_if(words, [](const std::string& w) { return w.empty(); });
  return words;
}

int edit_distance(const std::vector<std::string>& a,
                  const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace

WerResult wer_detailed(std::string_view hypothesis,
                       std::string_view reference) {
  const std::vector<std::string> hyp = tokenize(hypothesis);
  const std::vector<std::string> ref = tokenize(reference);
  WerResult r;
  r.ref_words = static_cast<int>(ref.size());
  if (ref.empty()) {
    // Insertions only, over a unit length; flagged for the caller.
    r.edits = static_cast<int>(hyp.size());
    r.wer = static_cast<double>(hyp.size());
    r.empty_reference = !hyp.empty();
    return r;
  }
  r.edits = edit_distance(hyp, ref);
  r.wer = static_cast<double>(r.edits) / static_cast<double>(ref.size());
  return r;
}

double wer(std::string_view hypothesis, std::string_view reference) {
  return wer_detailed(hypothesis, reference).wer;
}

}  // namespace phasecoder
