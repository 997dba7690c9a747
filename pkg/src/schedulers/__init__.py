# 调度模块
