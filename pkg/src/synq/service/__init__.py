from .adapter import ParserAdapter
from .api import ServiceState, create_app
from .store import AnnotationStore

__all__ = ["AnnotationStore", "ParserAdapter", "ServiceState", "create_app"]
