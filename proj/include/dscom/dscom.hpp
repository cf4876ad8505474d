#ifndef DSCOM_DSCOM_HPP
#define DSCOM_DSCOM_HPP

#include "dscom/attention.hpp"
#include "dscom/baselines.hpp"
#include "dscom/cascade.hpp"
#include "dscom/centrality.hpp"
#include "dscom/community.hpp"
#include "dscom/config.hpp"
#include "dscom/diffusion_model.hpp"
#include "dscom/error.hpp"
#include "dscom/graph.hpp"
#include "dscom/parallel.hpp"
#include "dscom/pipeline.hpp"
#include "dscom/relation_learning.hpp"
#include "dscom/rng.hpp"
#include "dscom/seed_selection.hpp"
#include "dscom/synthetic.hpp"

#endif
