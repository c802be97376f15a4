/*
 * Copyright 2026 The apesed Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef APESED_TRANSFER_HPP_
#define APESED_TRANSFER_HPP_

#include <filesystem>
#include <vector>

#include "apesed/checkpoint.hpp"
#include "apesed/dataset.hpp"
#include "apesed/metrics.hpp"

namespace apesed {

// Evaluates `ckpt` on a corpus partition. Labels are collapsed to call /
// non-call when the checkpoint was trained binary; otherwise the corpus must
// have the checkpoint's class count.
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const Corpus& corpus, const std::vector<std::string>& ids);

struct TransferJob {
  std::filesystem::path checkpoint;
  Corpus target;
  Split split;
  Partition partition = Partition::kTest;
};

// Zero-shot evaluation of a binary checkpoint on a different corpus. The
// checkpoint file is only read.
EvalReport transfer_eval(const TransferJob& job);

}  // namespace apesed

#endif  // APESED_TRANSFER_HPP_
