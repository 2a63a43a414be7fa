#pragma once

#include "tractconn/connectome.hpp"
#include "tractconn/error.hpp"
#include "tractconn/geometry.hpp"
#include "tractconn/graph/louvain.hpp"
#include "tractconn/graph/metrics.hpp"
#include "tractconn/graph/report.hpp"
#include "tractconn/io/bytes.hpp"
#include "tractconn/io/checkpoint.hpp"
#include "tractconn/io/manifest.hpp"
#include "tractconn/io/tck.hpp"
#include "tractconn/io/text.hpp"
#include "tractconn/label_codec.hpp"
#include "tractconn/matrix.hpp"
#include "tractconn/net/adam.hpp"
#include "tractconn/net/architecture.hpp"
#include "tractconn/net/kernels.hpp"
#include "tractconn/net/model.hpp"
#include "tractconn/net/predict.hpp"
#include "tractconn/net/train.hpp"
#include "tractconn/random.hpp"
#include "tractconn/stats/classification.hpp"
#include "tractconn/stats/reports.hpp"
#include "tractconn/stats/similarity.hpp"
#include "tractconn/stats/wilcoxon.hpp"
#include "tractconn/synth.hpp"
