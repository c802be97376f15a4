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

#include "apesed/transfer.hpp"

#include "apesed/error.hpp"
#include "apesed/training.hpp"

namespace apesed {

EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const Corpus& corpus, const std::vector<std::string>& ids) {
  if (ckpt.feature_kind != corpus.feature_kind)
    throw Error(ErrorKind::kFeatureKindMismatch, "checkpoint uses " + std::string(to_string(ckpt.feature_kind)) +
                                                     " features, corpus has " +
                                                     std::string(to_string(corpus.feature_kind)));
  const size_t classes = ckpt.model.config().num_class;
  if (!ckpt.binary && corpus.vocab.num_classes() != classes)
    throw Error(ErrorKind::kClassArityMismatch, "checkpoint predicts " + std::to_string(classes) +
                                                    " classes, corpus has " +
                                                    std::to_string(corpus.vocab.num_classes()));
  const auto examples = load_pairs(corpus, ids, ckpt.binary);
  return evaluate_model(ckpt.model, examples);
}

EvalReport transfer_eval(const TransferJob& job) {
  const Checkpoint ckpt = load_checkpoint(job.checkpoint);
  if (ckpt.feature_kind != job.target.feature_kind)
    throw Error(ErrorKind::kFeatureKindMismatch, "checkpoint uses " + std::string(to_string(ckpt.feature_kind)) +
                                                     " features, target corpus has " +
                                                     std::string(to_string(job.target.feature_kind)));
  if (ckpt.model.config().num_class != 2)
    throw Error(ErrorKind::kClassArityMismatch, "binary transfer needs a 2-class checkpoint, got " +
                                                    std::to_string(ckpt.model.config().num_class) + " classes");
  const auto examples = load_pairs(job.target, partition_ids(job.split, job.partition), true);
  return evaluate_model(ckpt.model, examples);
}

}  // namespace apesed
