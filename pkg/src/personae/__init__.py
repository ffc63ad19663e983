"""personae: identity extraction from short biographies, person-context
embeddings, and stereotype evaluation metrics."""

from .corpus import (
    CooccurrenceIndex,
    EvalInstance,
    SplitCorpus,
    Vocabulary,
    build_cooccurrence,
    build_vocabulary,
    filter_trainable,
    split_corpus,
)
from .eval_dimension import (
    DimensionReport,
    DimensionSpec,
    SurveyRating,
    build_dimension,
    project,
    race_aggregate,
    ranking_agreement,
)
from .eval_predict import (
    EvalReport,
    PredictionResult,
    evaluate,
    score_instance,
    top_percent_cutoff,
)
from .extraction import (
    Bio,
    RawBio,
    SyntheticSpec,
    extract_twitter,
    extract_wikipedia,
    generate_synthetic,
)
from .finetune_data import (
    MaskedBio,
    Triplet,
    export_datasets,
    make_masked,
    make_triplet,
)
from .sgns import EmbeddingTable, TrainConfig, loss_and_gradient, train
from .store import (
    InstanceProvider,
    PhraseSetEmbedding,
    TableProvider,
    nearest_neighbors,
    random_provider,
    similarity,
)

__version__ = "0.1.0"
