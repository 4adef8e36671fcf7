from typing import Dict, List, Optional, TypedDict


class DiagnosticRecord(TypedDict):
    rule: str
    severity: str
    message: str
    file: Optional[str]
    line: Optional[int]
    column: Optional[int]


class ProcessLoadRecord(TypedDict):
    msgs_per_sec: float
    cost_per_sec: float
    activations_per_sec: float


class NodeLoadRecord(TypedDict):
    cost_per_sec: float
    utilization: Optional[float]


class LoadReportRecord(TypedDict):
    configuration: str
    per_process: Dict[str, ProcessLoadRecord]
    per_connector: Dict[str, float]
    per_node: Dict[str, NodeLoadRecord]
    per_link: Dict[str, float]
    total_msgs_per_sec: float
    diagnostics: List[DiagnosticRecord]


class CheckSummaryRecord(TypedDict):
    file: str
    errors: int
    warnings: int
    infos: int
