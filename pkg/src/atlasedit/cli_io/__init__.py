from .config import PipelineConfig, resolve_provider_set
from .manifest import ProjectJournal

__all__ = ["PipelineConfig", "resolve_provider_set", "ProjectJournal"]
