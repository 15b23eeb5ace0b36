#pragma once

#include "senselab/error.hpp"
#include "senselab/io.hpp"
#include "senselab/random.hpp"

#include "senselab/numeric/grad_check.hpp"
#include "senselab/numeric/matrix.hpp"
#include "senselab/numeric/ops.hpp"

#include "senselab/corpus/annotated.hpp"
#include "senselab/corpus/tokenize.hpp"
#include "senselab/corpus/vocabulary.hpp"
#include "senselab/corpus/xml.hpp"

#include "senselab/lstm/checkpoint.hpp"
#include "senselab/lstm/inference.hpp"
#include "senselab/lstm/network.hpp"
#include "senselab/lstm/params.hpp"
#include "senselab/lstm/train.hpp"

#include "senselab/wsd/classify.hpp"
#include "senselab/wsd/label_propagation.hpp"
#include "senselab/wsd/sense_table.hpp"

#include "senselab/eval/pseudo.hpp"
#include "senselab/eval/score.hpp"
