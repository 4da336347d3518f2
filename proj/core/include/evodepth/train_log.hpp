#pragma once

namespace evd {

struct TrainEpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_metric = 0.0;
};

}  // namespace evd
