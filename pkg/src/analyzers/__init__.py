# 单 chiplet 代价模型
