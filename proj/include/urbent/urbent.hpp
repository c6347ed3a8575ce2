#pragma once

#include "urbent/geo.hpp"
#include "urbent/text.hpp"
#include "urbent/timeutil.hpp"
#include "urbent/csv.hpp"
#include "urbent/ingest.hpp"
#include "urbent/synthetic.hpp"
#include "urbent/spatial_index.hpp"
#include "urbent/dbscan.hpp"
#include "urbent/silhouette.hpp"
#include "urbent/hull.hpp"
#include "urbent/refine.hpp"
#include "urbent/characterize.hpp"
#include "urbent/report.hpp"
#include "urbent/pipeline.hpp"
