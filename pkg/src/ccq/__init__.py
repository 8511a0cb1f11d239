"""Code comment quality classification toolkit.

Parse labeled code/comment corpora, embed them with interchangeable
providers, balance classes with SMOTE, train from-scratch classifiers
(random forest, MLP, linear SVC, hard voting) and evaluate them with
repeated stratified k-fold cross-validation. Includes intake tooling for
LLM-generated augmentation data with quality-control filtering.
"""

__version__ = "0.1.0"
