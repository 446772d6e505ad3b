#pragma once

#include "run_config.hpp"

namespace dsakt::cli {

int cmd_gen(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_predict(const RunConfig& config);
int cmd_export_attention(const RunConfig& config);

}  // namespace dsakt::cli
