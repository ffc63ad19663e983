"""personae-harness: fine-tunes encoders on exported identity datasets
and writes embeddings back in the core file formats."""

from .config import HarnessConfig
from .contrastive import train_contrastive
from .export import export_embeddings
from .masked import train_masked
from .models import build_tiny_model, build_tokenizer, encode_texts, load_encoder, pool

__version__ = "0.1.0"
