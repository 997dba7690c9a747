"""项目异常类型"""


class ChipletSchedError(Exception):
    """所有项目异常的基类"""


class ConfigError(ChipletSchedError, ValueError):
    """配置文件或命令行参数错误"""


class ShapeError(ChipletSchedError, ValueError):
    """GEMM / 卷积形状非法，消息中包含出错字段名"""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class GraphValidationError(ChipletSchedError, ValueError):
    """模型图校验失败，problems 中每条都带 layer id"""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class ScheduleValidationError(ChipletSchedError, ValueError):
    """调度树违反约束，rule 为被违反的规则名"""

    def __init__(self, rule: str, message: str):
        super().__init__(f"[{rule}] {message}")
        self.rule = rule


class SearchError(ChipletSchedError, RuntimeError):
    """调度搜索无法给出结果（候选集为空、规模超限等）"""
