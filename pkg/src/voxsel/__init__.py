"""Paralinguistic feature extraction and language/classifier-independent
feature selection for vocal emotion recognition."""

from .audio import Signal, FrameSequence, read_wav, write_wav, peak_normalize, \
    frame_signal, fit_length
from .catalog import FeatureLabel, FEATURE_NAMES, N_FEATURES, label_of, label_at
from .classifiers import (TrainConfig, KNearestNeighbors, MulticlassSVM,
                          GradientDescentMLP, StumpAdaBoost, JacobiPCA, PCAKNN,
                          make_classifier, save_model, load_model)
from .dataset import (LabeledDataset, CorpusManifest, SynthClassSpec,
                      DEFAULT_SYNTH_CLASSES, build_dataset, synth_corpus,
                      load_dataset_csv, save_dataset_csv, load_manifest,
                      save_manifest)
from .errors import VoxselError, WavError, DataError, TrainingError
from .evaluation import CvConfig, EvalReport, kfold_split, cross_validate, \
    per_class_rates
from .extraction import ExtractionConfig, FeatureVectorExtractor, \
    extract_feature_vector, read_config, write_config
from .filters import (DiscreteColumn, discretize, entropy, info_gain,
                      gain_ratio, symmetrical_uncertainty, cfs_merit, relieff,
                      filter_scores)
from .selection import (FeatureSet, RankingTable, SelectionConfig,
                        rank_individual, rank_filter, top_m, common_features,
                        special_features, language_independent,
                        classifier_independent, fully_independent,
                        per_emotion_analysis, load_fixture_ranking,
                        load_fixture_category)
from .spectro import Spectrogram, spectrogram, export_image

__version__ = "0.1.0"
