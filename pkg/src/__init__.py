# 异构 chiplet MCM 调度分析
