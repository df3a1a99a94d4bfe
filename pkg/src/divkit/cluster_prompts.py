"""Prompt catalog for the clustering judge pipeline, version 1.

The template strings are the pipeline's wire contract and must not drift:
tooling that audits transcripts relies on them byte-for-byte (see the golden
tests). Placeholders are python str.format fields — {samples}, {metadata},
{metric}, {k}, {clusters}, {criteria} — and literal braces in the JSON
demonstrations are doubled accordingly.
"""

from __future__ import annotations

import json
from typing import Iterable

CATALOG_VERSION = 1


METADATA_METRIC_GENERATION = """# Task

You are going to evaluate the diversity of text corpus based on clustering.
Before clustering, your task is to come up with a set of cluster metadata and cluster metrics that can measure the true underlying diversity, better group samples, and better discriminate between clusters.

## Instructions

To design the metadata and metrics, you will be given a set of individual samples, and return 3-5 metadata and 3-5 metrics and their definitions that can help better cluster them.
You should avoid generic terms for metadata and metrics as they are not suitable for fine-grained clustering.
I will run this for multiple rounds and gather the unique metadata and metrics eventually.

## Outputs Demonstration and Format

Your output needs to be in the following JSON format:

```json

{{

'metadata': {{

    # [a dict of 3-5 metadata]

    'metadata_name': "concrete definition of metadata name, use hierarchy to if necessary (level 1/level 2/level 3/.../level k), where each level is more nuanced.",

    ...,
}}

'metric': {{

    # [a dict of 3-5 metrics]

    'metric_name': "specific justification and analysis for metric that will be used for clustering. You need define detailed scoring from 1-5 for each metric",

    ...,
}}

}}

```

## All samples

{samples}

## Outputs
"""


METADATA_SUMMARY = """# Task

Your tasks is to group a dictionary of metadata and their definition that describes the characteristics of a group of sampled texts.
You need to summarize and return **K={k}** metadata and their unique definition, which will be used later to cluster the text data.
The metadata needs be able to measure the true underlying diversity, better group samples, and better discriminate between clusters.

## Instructions

The metadata dictionary has the following structure:

```

{{

'metadata_1': [ 'definition_1', 'definition_2', ... ],

'metadata_2': [ 'definition_1', 'definition_2', ... ],

...

}}

```

Each key in the dictionary indicates a unique metadata and each item indicates the list of definition of this metadata (generated by different round of samples)
You need first to collect all unique keys according to their meaning and definition, and choose and summarize them as the general ones.
Then you need to refine the definition for each unique key to make it **concrete** and **suitable to cluster** the data.
There might be more than 5 keys in the dictionary and you need to summarize them.

## Outputs Demonstration and Format

Your output needs to be in the following JSON format:

```json

{{

'metadata_1': 'definition of metadata_1, use hierarchy levels along with definition if necessary (as level1/level2/level3...), where deeper levels are more nuanced',

'metadata_2': 'definition of metadata_2, use hierarchy levels along with definition if necessary (as level1/level2/level3...), where deeper levels are more nuanced',

...

'metadata_k': 'definition of metadata_k, use hierarchy levels along with definition if necessary (as level1/level2/level3...), where deeper levels are more nuanced',

}}

```

## All metadata

{metadata}

## Outputs
"""


METRIC_SUMMARY = """# Task

Your tasks is to group a dictionary of metrics and their definition that measures the key characteristics of a group of sampled texts.
You need to summarize and return **K={k}** metrics and their unique definition and score levels (from 1-5) that will be used later to cluster the text data, so the metrics needs be able to measure the true underlying diversity, better group samples, and better discriminate between clusters.

## Instructions

The metric dictionary has the following structure:

```

{{

'metric_1': ['definition_1', 'definition_2', ...],

'metric_2': ['definition_1', 'definition_2', ...],

...

}}

```

Each key in the dictionary indicates a unique metric and each item indicates the list of definition of this metric (generated by different round of samples)
You need first to collect all unique keys according to their meaning and definition, and choose and summarize them as the general ones.
Then you need to refine the definition for each unique key to make it **concrete** and **suitable to cluster and score** the data.
There might be more than 5 keys in the dictionary and you need to summarize them.

## Outputs Demonstration and Format

Your output needs to be in the following JSON format:

```json

{{

'metric_1': 'definition of metric_1, score 1-5 definition',

'metric_2': 'definition of metric_2, score 1-5 definition,

...

'metric_k': 'definition of metric_k, score 1-5 definition'

}}

```

## All metadata

{metric}

## Outputs
"""


CRITERIA_SUMMARY = """# Task

Given a group of metadata and metrics with their definitions, your task is to summarize each metadata and metric concisely as one sentence, which will be used as criteria guidance for clustering the text data.

## Instructions

The metadata and metric dictionary have the following structure:

```

{{

'metadata_1/metric_1': 'definition of metadata_1/metric_1',

'metadata_2/metric_2': 'definition of metadata_2/metric_2'

...

}}

```

## Outputs Demonstration and Format

Your output needs to be in the following JSON format:

```json

{{

'metadata_1': 'concise criteria for clustering text samples based on definition of metadata_1',
...
'metadata_k': 'concise criteria for clustering text samples based on definition of metadata_k',

'metric_1': 'concise criteria for clustering text samples based on definition of metric_1',
...
'metric_2': 'concise criteria for clustering text samples based on definition of metric_2',

}}

```

You need to summarize the criteria from the definition of each metric and metadata to make it a concise guidance for clustering text.

## Metadata

{metadata}

## Metric

{metric}

## Outputs
"""


CLUSTERING = """# Task

You are evaluating the diversity of synthetic data. Given a set of randomly sampled synthetic text from the dataset, your task is to measure the absolute diversity of these samples.

## Instructions
To measure the diversity, you need to cluster the samples by a set of metrics and metadata.

## Clustering Criteria:
{criteria}

## Clusters

You need to output all the clusters from the given samples, even if a cluster contains only one sample.
Your output needs to be in the following JSON format:

'''json

{{

"clusters": [

{{

"cluster": n,

"sample indices": [sample indices in the cluster],

"uniqueness reasoning": "justification of what makes this group/cluster unique, how is it different than the other clusters as a group",

"cluster_metadata":

{{

"metadata_1": "definition of metadata_1",

...

}},

"cluster_metrics":

{{

"metric_1":

{{
"reasoning": "definition of this metric and its score definition",

"score": int 5-1 score

}},

...

}}

}},

...

]

...

}}

'''

## All samples

{samples}

## Outputs
"""


SELF_VERIFICATION = """# Task

You are measuring the diversity of text data.
Given a set of text samples and a set of dictionary of clustered text indices with corresponding reasoning over text metadata and metrics, your task is to verify whether the clustered text samples can be clustered as a group.
The verification should be based on the similarity of the text samples, and the reasoning part from the cluster dictionary.

## Illustration

You will be given a set of samples:

```

1. Text 1

2. Text 2

...

K. Text k

```

and a set of dictionary of clusters:

```

[

    {{

        'cluster': 1,

        'sample indices': [...],

        'reasoning': ...

    }},

    ...

]

```

Your task is to verify whether each cluster is reasonable and return a binary indication 0/1 for each cluster as:

```

[

    {{ 'cluster': 1, 'valid': 0/1, 'reasoning':...}},

    ...

]

```

where 0 indicates an invalid cluster and 1 indicate a valid cluster.
You should include your detailed reasoning for the validation each cluster, e.g., these samples can be clustered together as they all follow the same topic, or these samples cannot be clustered because of their difference.
You should mark all clusters with one single sample as 1.

## Samples

{samples}

## Clusters

{clusters}

## Outputs
"""


def render_samples(texts: Iterable[str]) -> str:
    """Numbered sample block: '1. <text>' entries separated by blank lines."""
    return "\n\n".join(f"{i}. {t}" for i, t in enumerate(texts, start=1))


def render_criteria_block(pairs: Iterable[tuple[str, str]]) -> str:
    """Numbered '<n>. <name>: <criterion>' lines separated by blank lines.

    Callers pass metadata and metric entries interleaved (metadata first),
    which is the layout the clustering instructions demonstrate.
    """
    return "\n\n".join(f"{i}. {name}: {criterion}" for i, (name, criterion) in enumerate(pairs, start=1))


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def metadata_metric_generation_prompt(sample_texts: list[str]) -> str:
    return METADATA_METRIC_GENERATION.format(samples=render_samples(sample_texts))


def metadata_summary_prompt(pool_metadata: dict[str, list[str]], k: int) -> str:
    return METADATA_SUMMARY.format(k=k, metadata=_dump(pool_metadata))


def metric_summary_prompt(pool_metrics: dict[str, list[str]], k: int) -> str:
    return METRIC_SUMMARY.format(k=k, metric=_dump(pool_metrics))


def criteria_summary_prompt(metadata: dict[str, str], metrics: dict[str, str]) -> str:
    return CRITERIA_SUMMARY.format(metadata=_dump(metadata), metric=_dump(metrics))


def clustering_prompt(criteria_pairs: list[tuple[str, str]], sample_texts: list[str]) -> str:
    return CLUSTERING.format(
        criteria=render_criteria_block(criteria_pairs),
        samples=render_samples(sample_texts),
    )


def self_verification_prompt(sample_texts: list[str], clusters: list[dict]) -> str:
    cluster_view = [
        {
            "cluster": c["cluster"],
            "sample indices": c["sample indices"],
            "reasoning": c["reasoning"],
        }
        for c in clusters
    ]
    return SELF_VERIFICATION.format(
        samples=render_samples(sample_texts),
        clusters=_dump(cluster_view),
    )
